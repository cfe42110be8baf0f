import itertools
import json

import pytest

from galcohom.cli import EXIT_FAIL, EXIT_INPUT, EXIT_OK, main, render_factors


def write_spec(tmp_path, doc, name="m.json"):
    p = tmp_path / name
    p.write_text(json.dumps(doc))
    return str(p)


def s3_sign_mod3_h1_order():
    # crossed homomorphisms S3 -> Z/3 (sign action) modulo principal ones, by brute force
    perms = list(itertools.permutations(range(3)))
    idx = {p: i for i, p in enumerate(perms)}

    def mul(a, b):
        return idx[tuple(perms[a][perms[b][k]] for k in range(3))]

    def sign(a):
        p = perms[a]
        return -1 if sum(p[i] > p[j] for i in range(3) for j in range(i + 1, 3)) % 2 else 1

    n = len(perms)
    crossed = 0
    for f in itertools.product(range(3), repeat=n):
        if all((f[mul(a, b)] - f[a] - sign(a) * f[b]) % 3 == 0 for a in range(n) for b in range(n)):
            crossed += 1
    principal = {tuple((sign(a) * m - m) % 3 for a in range(n)) for m in range(3)}
    return crossed // len(principal)


def test_render_factors():
    assert render_factors([]) == "0"
    assert render_factors([2, 0]) == "Z/2 + Z"


def test_trivial_c2_degree_two(tmp_path, capsys):
    spec = write_spec(tmp_path, {"group": {"permutations": ["(1 2)"]}, "ring": "Z", "rank": 1, "actions": [[[1]]]})
    assert main(["cohomology", spec, "--degree", "2"]) == EXIT_OK
    assert "Z/2" in capsys.readouterr().out


def test_s3_sign_mod3(tmp_path, capsys):
    spec = write_spec(tmp_path, {"group": {"permutations": ["(1 2)", "(1 2 3)"]}, "ring": 3, "rank": 1,
                                 "actions": [[[-1]], [[1]]]})
    assert main(["cohomology", spec, "--degree", "1", "--format", "json"]) == EXIT_OK
    doc = json.loads(capsys.readouterr().out)
    order = 1
    for f in doc["invariant_factors"]:
        order *= f
    assert order == s3_sign_mod3_h1_order() == 3


def test_bad_action_reports_location(tmp_path, capsys):
    spec = write_spec(tmp_path, {"group": {"permutations": ["(1 2)"]}, "ring": 4, "rank": 1, "actions": [[[2]]]})
    assert main(["cohomology", spec, "--degree", "1"]) == EXIT_INPUT
    err = capsys.readouterr().err
    assert spec in err and "actions" in err


def test_broken_json_reports_line_and_column(tmp_path, capsys):
    p = tmp_path / "bad.json"
    p.write_text('{"ring": 4,\n  "rank": }')
    assert main(["cohomology", str(p), "--degree", "0"]) == EXIT_INPUT
    assert f"{p}:2:" in capsys.readouterr().err


def test_degree_cap(tmp_path, capsys):
    spec = write_spec(tmp_path, {"group": {"permutations": ["(1 2)"]}, "ring": 2, "rank": 1, "actions": [[[1]]]})
    assert main(["cohomology", spec, "--degree", "5"]) == EXIT_INPUT
    assert main(["cohomology", spec, "--degree", "5", "--degree-cap", "5"]) == EXIT_OK


def test_unknown_suite_is_input_error():
    with pytest.raises(SystemExit) as e:
        main(["verify", "no-such-suite"])
    assert e.value.code == EXIT_INPUT


def test_bad_place_is_input_error(capsys):
    assert main(["verify", "creutz", "--places", "inf,2,15"]) == EXIT_INPUT


def test_verify_creutz(capsys):
    assert main(["verify", "creutz"]) == EXIT_OK
    assert "sum = 1/2" in capsys.readouterr().out


def test_verify_creutz_missing_bad_prime(capsys):
    assert main(["verify", "creutz", "--places", "inf,2,3"]) in (EXIT_FAIL, EXIT_INPUT)


def test_verify_json_is_reproducible(tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    for out in (a, b):
        assert main(["verify", "hilbert-product", "--seed", "7", "--trials", "500", "--out", str(out)]) == EXIT_OK
    assert a.read_bytes() == b.read_bytes()
    assert json.loads(a.read_text())["passed"]
