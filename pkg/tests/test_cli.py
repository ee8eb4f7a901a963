import json
import subprocess
import sys

from limlaw.cli import main

PAIR = "exists x. exists y. (x E y & !(x = y))"
FIRST_TWO = ("exists x. exists y. (!(exists z. z < x) & x < y"
             " & !(exists z. (x < z & z < y)) & x E y)")


def run_cli(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


class TestLimit:
    def test_pair_sentence(self, capsys):
        code, out, _ = run_cli(capsys, "limit", "--theory", "convex",
                               "--formula", PAIR)
        assert code == 0
        assert "limit = 1/1" in out
        assert "chain states:" in out

    def test_layered_descent(self, capsys):
        code, out, _ = run_cli(capsys, "limit", "--theory", "layered",
                               "--formula", "exists x. exists y. (x <1 y & y <2 x)")
        assert code == 0
        assert "limit = 1/1" in out

    def test_tautology_with_k1(self, capsys):
        code, out, _ = run_cli(capsys, "limit", "--formula", "forall x. x = x")
        assert code == 0
        assert "limit = 1/1" in out
        assert "k: 1" in out
        assert "chain states: 1" in out

    def test_depth3_exact_half(self, capsys):
        code, out, _ = run_cli(capsys, "limit", "--formula", FIRST_TWO)
        assert code == 0
        assert "limit = 1/2" in out

    def test_verify_and_exports(self, capsys, tmp_path):
        json_path = tmp_path / "chain.json"
        dot_path = tmp_path / "chain.dot"
        code, out, _ = run_cli(capsys, "limit", "--formula", PAIR, "--verify",
                               "--emit-json", str(json_path),
                               "--emit-dot", str(dot_path))
        assert code == 0
        doc = json.loads(json_path.read_text())
        assert doc["limit_probability"] == "1/1"
        from fractions import Fraction

        accepting_mass = sum(
            (Fraction(p) for s, p in zip(doc["states"], doc["limit"])
             if s["accepting"]), Fraction(0))
        assert accepting_mass == 1
        assert "⊕• 1/2" in dot_path.read_text()

    def test_parse_error_exit_2(self, capsys):
        code, _, err = run_cli(capsys, "limit", "--formula", "exists x (x = x")
        assert code == 2
        assert "error" in err

    def test_foreign_symbol_exit_2(self, capsys):
        code, _, _ = run_cli(capsys, "limit", "--theory", "convex",
                             "--formula", "exists x. exists y. x p1 y")
        assert code == 2

    def test_free_variable_exit_2(self, capsys):
        code, _, _ = run_cli(capsys, "limit", "--formula", "x < y")
        assert code == 2

    def test_formula_file(self, capsys, tmp_path):
        path = tmp_path / "f.txt"
        path.write_text(PAIR)
        code, out, _ = run_cli(capsys, "limit", "--formula-file", str(path))
        assert code == 0
        assert "limit = 1/1" in out

    def test_k_override_upward_only(self, capsys):
        code, out, _ = run_cli(capsys, "limit", "--formula",
                               "forall x. x = x", "--k", "2")
        assert code == 0
        assert "k: 2" in out and "limit = 1/1" in out
        code, _, _ = run_cli(capsys, "limit", "--formula", PAIR, "--k", "1")
        assert code == 2


class TestEstimate:
    def test_compare_limit(self, capsys):
        code, out, _ = run_cli(
            capsys, "estimate", "--formula", FIRST_TWO, "--n", "200",
            "--samples", "20000", "--seed", "42", "--compare-limit")
        assert code == 0
        assert "limit = 1/2" in out
        gap = [l for l in out.splitlines() if "|estimate - limit|" in l]
        assert gap and float(gap[0].split("≈")[1]) < 0.01

    def test_trivially_false(self, capsys):
        code, out, _ = run_cli(capsys, "estimate", "--formula", "false",
                               "--n", "5", "--samples", "100", "--seed", "1")
        assert code == 0
        assert "estimate = 0/1" in out

    def test_byte_identical_repeat_runs(self, capsys):
        args = ("estimate", "--formula", PAIR, "--n", "50",
                "--samples", "5000", "--seed", "9")
        _, out1, _ = run_cli(capsys, *args)
        _, out2, _ = run_cli(capsys, *args)
        assert out1 == out2

    def test_threads_do_not_change_output(self, capsys):
        base = ("estimate", "--formula", PAIR, "--n", "30",
                "--samples", "6000", "--seed", "3")
        _, out1, _ = run_cli(capsys, *base)
        _, out2, _ = run_cli(capsys, *base, "--threads", "3")
        assert out1 == out2


class TestTranslate:
    def test_layered_expansion_verbatim(self, capsys):
        code, out, _ = run_cli(capsys, "translate", "--from", "layered",
                               "--formula", "exists x. exists y. x <2 y")
        assert code == 0
        assert out.strip() == ("exists x. exists y. "
                               "((x E y & y < x) | (!(x E y) & x < y))")

    def test_composition_bullet(self, capsys):
        code, out, _ = run_cli(capsys, "translate", "--from", "composition",
                               "--formula", "exists x. exists y. x p1 y")
        assert code == 0
        assert out.strip() == "exists x. exists y. (!(x E y) & x < y)"

    def test_identity_on_pure_e_sentence(self, capsys):
        code, out, _ = run_cli(capsys, "translate", "--from", "composition",
                               "--formula", "exists x. exists y. x E y")
        assert code == 0
        assert out.strip() == "exists x. exists y. x E y"

    def test_foreign_symbol_exit_2(self, capsys):
        code, _, _ = run_cli(capsys, "translate", "--from", "layered",
                             "--formula", "exists x. exists y. x p1 y")
        assert code == 2


class TestEf:
    def test_linear_order_duplicator(self, capsys):
        code, out, _ = run_cli(capsys, "ef", "1,1,1", "1,1,1,1,1", "--k", "2")
        assert code == 0
        assert out.splitlines()[0] == "duplicator"

    def test_linear_order_spoiler(self, capsys):
        code, out, _ = run_cli(capsys, "ef", "1,1", "1,1,1", "--k", "2")
        assert code == 0
        assert out.splitlines()[0] == "spoiler"

    def test_self_play(self, capsys):
        for k in range(5):
            code, out, _ = run_cli(capsys, "ef", "2,1,3", "2,1,3",
                                   "--k", str(k))
            assert code == 0
            assert out.splitlines()[0] == "duplicator"

    def test_oracle_reports_nodes(self, capsys):
        code, out, _ = run_cli(capsys, "ef", "2,1", "1,2", "--k", "2",
                               "--oracle")
        assert code == 0
        assert "nodes:" in out

    def test_budget_exit_3(self, capsys):
        code, _, err = run_cli(capsys, "ef", "1,1,1,1,1,1,1,1", "1,1,1,1,1,1,1",
                               "--k", "3", "--oracle", "--budget", "4")
        assert code == 3
        assert "budget" in err

    def test_other_theories(self, capsys):
        code, out, _ = run_cli(capsys, "ef", "--theory", "composition",
                               "2,1", "1,2", "--k", "1")
        assert code == 0
        assert out.splitlines()[0] == "duplicator"

    def test_bad_literal_exit_2(self, capsys):
        code, _, _ = run_cli(capsys, "ef", "2,0", "1,1", "--k", "1")
        assert code == 2


class TestStates:
    def test_k0_and_k1(self, capsys):
        for k in ("0", "1"):
            code, out, _ = run_cli(capsys, "states", "--k", k)
            assert code == 0
            assert "states: 1" in out
            assert "0: 1 " in out

    def test_k2_count(self, capsys):
        code, out, _ = run_cli(capsys, "states", "--k", "2")
        assert code == 0
        assert "states: 57" in out

    def test_k3_budget_exit_3(self, capsys):
        code, _, err = run_cli(capsys, "states", "--k", "3",
                               "--budget", "500")
        assert code == 3
        assert "budget" in err or "closure" in err

    def test_emit_json_round_trip(self, capsys, tmp_path):
        path = tmp_path / "states.json"
        code, _, _ = run_cli(capsys, "states", "--k", "2",
                             "--emit-json", str(path))
        assert code == 0
        doc = json.loads(path.read_text())
        assert doc["k"] == 2
        assert len(doc["states"]) == 57
        assert all(s["accepting"] is None for s in doc["states"])


class TestCheck:
    def test_pinned_examples(self, capsys):
        code, out, _ = run_cli(capsys, "check", "2,1", "--formula", PAIR)
        assert code == 0 and out.strip() == "true"
        code, out, _ = run_cli(capsys, "check", "1,1,1", "--formula", PAIR)
        assert code == 0 and out.strip() == "false"
        code, out, _ = run_cli(capsys, "check", "--theory", "composition",
                               "2,1", "--formula", "exists x. exists y. x p1 y")
        assert code == 0 and out.strip() == "true"

    def test_signature_mismatch_exit_2(self, capsys):
        code, _, _ = run_cli(capsys, "check", "2,1",
                             "--formula", "exists x. exists y. x <2 y")
        assert code == 2


def test_console_entry_point_runs():
    proc = subprocess.run(
        [sys.executable, "-m", "limlaw.cli", "limit", "--formula",
         "exists x. x = x"],
        capture_output=True, text=True, timeout=120)
    assert proc.returncode == 0
    assert "limit = 1/1" in proc.stdout
