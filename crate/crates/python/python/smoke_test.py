"""Smoke test for the pysolah extension. Run with the built module on PYTHONPATH."""

import json
import os
import sys

import pysolah

DATA = os.path.join(os.path.dirname(__file__), "..", "..", "..", "data")


def main():
    wine = pysolah.Dataset.load_csv(os.path.join(DATA, "wine.csv"))
    assert len(wine) == 178 and wine.n_attributes == 13, repr(wine)
    assert len(wine.classes) == 3

    r = pysolah.dcorr([1.0, 2.0, 3.0, 4.0], [2.0, 4.0, 6.0, 8.0])
    assert abs(r - 1.0) < 1e-12, r

    matrix, goal = pysolah.dcorr_matrix(wine)
    clusters = pysolah.dcc_cluster(matrix, 4)
    assert sorted(a for c in clusters for a in c) == list(range(13)), clusters
    text = pysolah.build_solah(clusters, goal, 0.02)
    assert text.startswith("attributes 13"), text

    model = pysolah.Model.fit(wine, k=4, theta=0.02)
    masses = model.predict_masses(wine.row(0))
    assert abs(sum(masses) - 1.0) < 1e-9, masses
    assert model.predict(wine.row(0)) == masses.index(max(masses))
    back = pysolah.Model.from_json(model.to_json())
    assert back.predict_masses(wine.row(0)) == masses
    assert json.loads(model.to_json())
    assert model.rule_count > 0 and model.levels >= 1

    flat = pysolah.Model.fit_hierarchy(wine, "attributes 13\nz13 <- {" + ", ".join(f"x{i}" for i in range(13)) + "}\nroot z13\n", labels=2)
    assert flat.levels == 1

    report = pysolah.crossval(wine, folds=5, seed=1)
    assert report["accuracy"] > 0.9, report
    assert len(report["fold_accuracy"]) == 5

    try:
        pysolah.crossval(wine, folds=1)
    except ValueError:
        pass
    else:
        raise AssertionError("folds=1 accepted")

    print(f"pysolah smoke test ok: crossval accuracy {report['accuracy']:.4f}")


if __name__ == "__main__":
    sys.exit(main())
