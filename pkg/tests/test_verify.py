import yaml

from serialsat.config import strawman_path
from serialsat.verify import run_verification


def names_status(results):
    return {r.name: r.ok for r in results}


def test_strawman_all_pass():
    results = run_verification(str(strawman_path()))
    status = names_status(results)
    assert all(status.values()), [r for r in results if not r.ok]
    for expected in ("config parses", "block solve equals dense solve",
                     "planar Lagrangian oracle agreement", "L symmetry",
                     "L positive definite", "equilibrium residual",
                     "free-float conservation", "A-matrix structure",
                     "B-matrix structure"):
        assert expected in status


def test_unknown_key_fails_parse(tmp_path):
    with open(strawman_path()) as fh:
        doc = yaml.safe_load(fh)
    doc["typo_section"] = 1
    path = tmp_path / "bad.yaml"
    path.write_text(yaml.safe_dump(doc))
    results = run_verification(str(path))
    assert len(results) == 1
    assert results[0].name == "config parses" and not results[0].ok


def test_zero_mass_blocks_plant_checks(tmp_path):
    with open(strawman_path()) as fh:
        doc = yaml.safe_load(fh)
    doc["bodies"]["boom"]["mass"] = 0.0
    path = tmp_path / "zero.yaml"
    path.write_text(yaml.safe_dump(doc))
    status = names_status(run_verification(str(path)))
    assert not status["body mass positive"]
    assert not status["L positive definite"]
    assert status["block solve equals dense solve"]  # code-level checks still run
