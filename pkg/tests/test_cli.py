import json
import re

import pytest

from pvdescent.algebra import format_matrix, parse_system
from pvdescent.cli import RunConfig, fmt_complex, main
from pvdescent.errors import InputError

HEADER = re.compile(r"^# pvdescent \S+ [\w-]+ \d{4}-\d\d-\d\dT\d\d:\d\d:\d\d\+00:00$")


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    cap = capsys.readouterr()
    return code, cap.out, cap.err


def body(out):
    head, _, rest = out.partition("\n")
    assert HEADER.match(head), head
    return rest


@pytest.fixture
def write(tmp_path):
    def _write(name, text):
        p = tmp_path / name
        p.write_text(text if isinstance(text, str) else json.dumps(text))
        return p
    return _write


# --- solve ------------------------------------------------------------------------------------


def test_solve_exponential_exact(capsys, write):
    code, out, _ = run(capsys, "solve", write("a.txt", "# e^z\n[[1]]\n"), "--mode", "exact", "--order", "5")
    assert code == 0
    text = body(out)
    for k, c in enumerate(["1", "1", "1/2", "1/6", "1/24"]):
        assert f"W_{k} =\n  [[{c}]]" in text
    assert "defining equation residual: zero" in text


def test_solve_float_mode(capsys, write):
    code, out, _ = run(capsys, "solve", write("a.txt", "[[i]]"), "--order", "3")
    assert code == 0 and "W_1 =\n  [[1*i]]" in body(out)


def test_solve_at_pole_is_precondition_error(capsys, write):
    code, out, err = run(capsys, "solve", write("a.txt", "[[1/z]]"))
    assert code == 2 and out == "" and "PoleEvaluation" in err


def test_parse_error_exit_code_and_position(capsys, write):
    code, _, err = run(capsys, "solve", write("a.txt", "[[1,]]"))
    assert code == 1 and "line 1" in err and "column 5" in err


def test_missing_file_and_bad_flags(capsys, tmp_path, write):
    assert run(capsys, "solve", tmp_path / "nope.txt")[0] == 1
    assert run(capsys, "solve", write("a.txt", "[[1]]"), "--order", "1")[0] == 1
    assert run(capsys, "solve", write("a.txt", "[[1]]"), "--step-fraction", "2")[0] == 1
    assert run(capsys, "frobnicate")[0] == 1


# --- monodromy ----------------------------------------------------------------------------------


def test_monodromy_half_residue(capsys, write):
    code, out, _ = run(capsys, "monodromy", write("a.txt", "[[(1/2)/z]]"), "--check-conjugation")
    text = body(out)
    assert code == 0
    m = re.search(r"M_0 around 0 =\n  \[\[(\S+)\]\]", text)
    assert complex(m.group(1).replace("*i", "j").replace("(", "").replace(")", "")) == pytest.approx(-1, abs=1e-8)
    assert re.search(r"conjugation residual: \S+ \(tol 1e-08\) pass", text)


def test_monodromy_two_poles_and_rep_out(capsys, write, tmp_path):
    rep_path = tmp_path / "rep.json"
    code, out, _ = run(capsys, "monodromy", write("a.txt", "[[(1/3)/(z-i) + (1/3)/(z+i)]]"),
                       "--rep-out", rep_path)
    assert code == 0
    text = body(out)
    assert "loops: 2 (standard)" in text and "product around all poles =" in text
    dev = float(re.search(r"enclosing circle deviation: (\S+)", text).group(1))
    assert dev < 1e-8
    data = json.loads(rep_path.read_text())
    assert len(data["loops"]) == len(data["matrices"]) == 2


def test_monodromy_explicit_loops(capsys, write):
    loops = [{"base": [2, 0], "vertices": [[2, 0], [0, 2], [-2, 0], [0, -2], [2, 0]]}]
    code, out, _ = run(capsys, "monodromy", write("a.txt", "[[(1/4)/z]]"), "--loops", write("l.json", loops))
    assert code == 0 and "M_0 =" in body(out)


def test_conjugate_check_command(capsys, write):
    code, out, _ = run(capsys, "conjugate-check", write("a.txt", "[[i/(z-i) + 1/(z+i)]]"))
    assert code == 0 and "pass" in body(out)
    code, _, err = run(capsys, "conjugate-check", write("b.txt", "[[1/(z-i)]]"))
    assert code == 1 and "InputError" in err


# --- gauge and descend ---------------------------------------------------------------------------


def test_gauge_by(capsys, write, tmp_path):
    out_path = tmp_path / "b.txt"
    code, out, _ = run(capsys, "gauge", write("a.txt", "[[0]]"), "--by", write("c.txt", "[[z]]"),
                       "--system-out", out_path)
    assert code == 0 and "exact check: pass" in body(out)
    assert parse_system(out_path.read_text()) == parse_system("[[-1/z]]")


def test_gauge_search_permutation(capsys, write):
    code, out, _ = run(capsys, "gauge", write("a.txt", "[[i/(z-1), 0],[0, -i/(z-1)]]"))
    text = body(out)
    assert code == 0 and format_matrix(parse_system("[[0,1],[1,0]]")) in text and "exact check: pass" in text


@pytest.mark.parametrize("system, real", [
    ("[[1]]", "[[1, 0],[0, 1]]"),
    ("[[i]]", "[[0, -1],[1, 0]]"),
    ("[[1+i]]", "[[1, -1],[1, 1]]"),
])
def test_descend_golden(capsys, write, system, real):
    code, out, _ = run(capsys, "descend", write("a.txt", system), "--series-check", "0", "--order", "32")
    text = body(out)
    assert code == 0
    assert "real system =\n" + format_matrix(parse_system(real)) in text
    assert "real coefficients: yes" in text
    assert "block series check through order 32: exact" in text


def test_descend_with_cocycle(capsys, write):
    code, out, _ = run(capsys, "descend", write("a.txt", "[[i, 1],[1, -i]]"),
                       "--cocycle", write("chi.txt", "[[0, 1],[1, 0]]"), "--no-numeric")
    assert code == 0 and "real coefficients: yes" in body(out)
    code, _, err = run(capsys, "descend", write("b.txt", "[[i]]"), "--cocycle", write("m.txt", "[[-1]]"))
    assert code == 2 and "NotDescendable" in err


# --- realize --------------------------------------------------------------------------------------


def test_realize_scalar(capsys, write, tmp_path):
    t = {"points": [[0, 1]], "generators": [[[2]]]}
    real_out = tmp_path / "real.txt"
    code, out, _ = run(capsys, "realize", write("t.json", t), "--real-out", real_out)
    text = body(out)
    assert code == 0
    assert "Gauss-Newton iterations: 0" in text
    assert "real system has real coefficients: yes" in text
    assert parse_system(real_out.read_text()).is_real()


def test_realize_input_errors(capsys, write):
    assert run(capsys, "realize", write("t.json", "{"))[0] == 1
    assert run(capsys, "realize", write("u.json", {"points": [[0, -1]], "generators": [[[2]]]}))[0] == 1
    code, _, err = run(capsys, "realize", write("v.json", {"points": [[0, 1]], "generators": [[[-1, 1], [0, -1]]]}))
    assert code == 2 and "[ansatz]" in err


def test_realize_no_convergence_exit_code(capsys, write):
    t = {"points": [[1, 1], [-1, 1]],
         "generators": [[[1, [0.1, 0.1]], [0.1, 1]], [[1, 0], [[0.2, -0.1], [1, 0.1]]]]}
    code, _, err = run(capsys, "realize", write("t.json", t), "--max-iter", "1", "--tol", "1e-15")
    assert code == 3 and "NoConvergence" in err


def test_pipeline_reports_both_comparisons(capsys, write):
    t = {"points": [[0, 1]], "generators": [[[[0, 1]]]]}
    code, out, _ = run(capsys, "pipeline", write("t.json", t))
    text = body(out)
    assert code == 0
    kron = float(re.search(r"max deviation from kron\(C, I2\): (\S+)", text).group(1))
    assert kron < 1e-8
    assert "max deviation from mu(C):" in text


# --- determinism and configuration ------------------------------------------------------------------


def test_identical_runs_differ_only_in_header(capsys, write):
    path = write("a.txt", "[[1/(z-i), (1/2)/(z+i)],[(1+i)/(z-2), -1/(z+i)]]")
    outs = [run(capsys, "monodromy", path, "--check-conjugation", "--jobs", j)[1] for j in (1, 3)]
    assert body(outs[0]) == body(outs[1])


def test_output_flag(capsys, write, tmp_path):
    dest = tmp_path / "report.txt"
    code, out, _ = run(capsys, "solve", write("a.txt", "[[1]]"), "-o", dest)
    assert code == 0 and out == "" and "W_0 =" in body(dest.read_text())


def test_run_config_validation():
    RunConfig()
    for bad in ({"order": 1}, {"step_fraction": 0}, {"tol_mono": -1}, {"mode": "fast"}, {"jobs": 0},
                {"seed": -1}):
        with pytest.raises(InputError):
            RunConfig(**bad)


def test_complex_formatting():
    assert fmt_complex(1.5) == "1.5"
    assert fmt_complex(-2j) == "-2*i"
    assert fmt_complex(1 - 0.5j) == "(1-0.5*i)"
