import json

import numpy as np
import pytest

from resfin import fixtures, io
from resfin.cli import main
from resfin.core import FiniteAction
from resfin.errors import ParseError, UnsupportedVersion
from resfin.matrix import encode_action
from resfin.paradox import decide_paradoxical, verify_certificate
from resfin.systems import BoundarySystem, ShiftSystem
from resfin.zsystems import model_from_chains


def _write(path, obj):
    path.write_text(json.dumps(obj))
    return str(path)


def test_minimal_shift_description():
    d = io.parse_system({"version": 1, "kind": "z-shift", "alphabet": 2})
    assert isinstance(d.system, ShiftSystem)
    assert d.system.rank == 1 and d.system.alphabet == 2


def test_boundary_description():
    d = io.parse_system({"version": 1, "kind": "fr-boundary", "rank": 2})
    assert isinstance(d.system, BoundarySystem) and d.system.rank == 2


def test_triangle_failure_names_triple():
    bad = {"version": 1, "kind": "finite-sample", "distances": [[0, 1, 5], [1, 0, 1], [5, 1, 0]],
           "images": [[0, 1, 2]]}
    with pytest.raises(ParseError, match=r"\(0, 1, 2\)"):
        io.parse_system(bad)


def test_unsupported_version():
    with pytest.raises(UnsupportedVersion):
        io.parse_system({"version": 7, "kind": "fr-boundary", "rank": 2})


def test_bad_json_reports_position(tmp_path):
    p = tmp_path / "broken.json"
    p.write_text('{"version": 1,\n "kind": }')
    with pytest.raises(ParseError, match="line 2"):
        io.parse_system_file(p)


def test_witness_round_trip():
    _, sample, eps = fixtures.chain_fixtures()[0]
    w = model_from_chains(sample, eps)
    back = io.witness_from_dict(json.loads(json.dumps(io.witness_to_dict(w))))
    assert back.action.generators == w.action.generators
    assert back.density_defect == w.density_defect
    assert back.passed == w.passed


def test_certificate_round_trip():
    system = BoundarySystem(2)
    ctx = io.build_context(system, 1, 2)
    cert = decide_paradoxical(ctx, tuple(ctx.source), 2, 1)
    assert cert is not None
    data = json.loads(json.dumps(io.certificate_to_dict(cert, system, 1, 2)))
    cert2, ctx2 = io.certificate_from_dict(data)
    assert ctx2.digest == ctx.digest
    assert verify_certificate(cert2, ctx2)


def test_tampered_certificate_is_refuted(tmp_path):
    system = BoundarySystem(2)
    ctx = io.build_context(system, 1, 2)
    data = io.certificate_to_dict(decide_paradoxical(ctx, tuple(ctx.source), 2, 1), system, 1, 2)
    data["pieces"] = data["pieces"][:-1]
    path = _write(tmp_path / "cert.json", data)
    assert main(["check-witness", path]) == 1


def test_matrix_sidecar_round_trip(tmp_path):
    t = encode_action(FiniteAction(4, ((1, 2, 3, 0), (1, 0, 3, 2))), 1e-3, seed=5)
    io.write_matrices(tmp_path / "m.bin", t)
    back = io.read_matrices(tmp_path / "m.bin")
    assert back.dimension == t.dimension
    for a, b in zip(back.projections + back.unitaries, t.projections + t.unitaries):
        assert np.array_equal(a, b)


def test_cli_exit_codes(tmp_path, capsys):
    line = _write(tmp_path / "line.json", {"version": 1, "kind": "compactified-z",
                                            "copies": [["-inf", "+inf"]]})
    shift = _write(tmp_path / "shift.json", {"version": 1, "kind": "z-shift", "alphabet": 2})
    cyc = _write(tmp_path / "cyc.json", {"version": 1, "kind": "finite-action", "size": 3,
                                         "generators": [[1, 2, 0]]})
    assert main(["compressible", line, "--window", "1"]) == 0
    assert main(["compressible", shift]) == 1
    capsys.readouterr()
    assert main(["paradox", cyc]) == 1
    out = capsys.readouterr().out
    assert "translators of length <= 1" in out and "none at this context" in out
    assert main(["no-such-command"]) == 2
    assert main([]) == 2


def test_cli_rejects_bad_input(tmp_path, capsys):
    bad = _write(tmp_path / "tri.json", {"version": 1, "kind": "finite-sample",
                                         "distances": [[0, 1, 5], [1, 0, 1], [5, 1, 0]],
                                         "images": [[0, 1, 2]]})
    assert main(["chain-recurrence", bad, "--epsilon", "1/2"]) == 2
    assert "(0, 1, 2)" in capsys.readouterr().err


def test_cli_artifacts_are_reproducible(tmp_path):
    fr = _write(tmp_path / "fr.json", {"version": 1, "kind": "fr-boundary", "rank": 2})
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    for out in (a, b):
        assert main(["paradox", fr, "--window", "1", "--ball", "2", "--out", str(out)]) == 0
    assert a.read_bytes() == b.read_bytes()
    data = json.loads(a.read_text())
    assert data["manifest"]["inputs"]
    assert main(["check-witness", str(a)]) == 0


def test_cli_microstate_sidecar(tmp_path):
    act = _write(tmp_path / "act.json", {"version": 1, "kind": "finite-action", "size": 3,
                                         "generators": [[1, 2, 0]]})
    side = tmp_path / "m.bin"
    assert main(["microstate-extract", act, "--noise", "1e-4", "--matrices", str(side)]) == 0
    assert main(["microstate-extract", str(side)]) == 0
    assert main(["microstate-extract", act, "--noise", "0.2"]) == 2


def test_cli_witness_chain(tmp_path):
    sample = _write(tmp_path / "c8.json", {"version": 1, "kind": "circle", "points": 8, "rotation": 1})
    out = tmp_path / "w.json"
    assert main(["chain-recurrence", sample, "--epsilon", "1/2", "--out", str(out)]) == 0
    assert main(["check-witness", str(out)]) == 0
    assert main(["affine-lift", str(out), "--m", "2"]) == 0
