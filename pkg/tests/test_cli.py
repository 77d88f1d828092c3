"""Command-line behavior: exit codes, determinism, report schema."""

import json

from liesym.cli import main


def run(argv):
    return main(argv)


class TestExitCodes:
    def test_verify_symmetry_pass(self, capsys):
        code = run(["verify-symmetry",
                    "--pde", "u_t = D(u^2,x,2) + D(u^2,x)",
                    "--field", "-t*Dt + u*Du"])
        assert code == 0
        assert "symmetry" in capsys.readouterr().out

    def test_verify_symmetry_refuted(self, capsys):
        code = run(["verify-symmetry",
                    "--pde", "u_t = D(u^2,x,2) + D(u^2,x)",
                    "--field", "-t*Dt - t*Dx + u*Du"])
        assert code == 1
        out = capsys.readouterr().out
        assert "not-symmetry" in out
        assert "u_x" in out

    def test_verify_solution_case(self, capsys):
        assert run(["verify-solution", "--pde", "case:eq1",
                    "--sol", "1"]) == 0

    def test_verify_solution_refuted(self):
        assert run(["verify-solution", "--pde", "u_t = D(u,x,2)",
                    "--sol", "x^2"]) == 1

    def test_usage_error(self, capsys):
        assert run(["verify-symmetry", "--pde", "u_t = u_x",
                    "--field", "q*Dt"]) == 3

    def test_unknown_case(self):
        assert run(["verify-solution", "--pde", "case:nope",
                    "--sol", "1"]) == 3

    def test_audit_flags_bad_candidates(self, tmp_path, capsys):
        cand = tmp_path / "c.txt"
        cand.write_text("1, 0, 0\n0, 1, 0\n0, 0, 1\n1, 1, 0\n-15/2, 0, 1\n")
        code = run(["audit-system", "--algebra", "case:eq5",
                    "--params", "m=2,p=3", "--candidates", str(cand),
                    "--samples", "200"])
        assert code == 1
        assert "pairs flagged: 1" in capsys.readouterr().out

    def test_audit_accepts_own_system(self, tmp_path, capsys):
        cand = tmp_path / "c.txt"
        cand.write_text("0, 0, 1\n1, 0, 0\n0, 1, 0\n1, 1, 0\n")
        code = run(["audit-system", "--algebra", "case:eq5",
                    "--params", "m=2,p=3", "--candidates", str(cand),
                    "--samples", "200"])
        assert code == 0

    def test_identify(self, capsys):
        assert run(["identify", "--algebra", "case:eq5",
                    "--params", "m=2,p=3"]) == 0
        assert "A3,5" in capsys.readouterr().out

    def test_reduce(self, capsys):
        assert run(["reduce", "--pde", "case:eq4", "--params", "m=2,p=1",
                    "--field", "Dt + 3*Dx"]) == 0
        assert "phi" in capsys.readouterr().out

    def test_regress_subset(self, capsys):
        assert run(["regress", "--samples", "60", "--cases", "heat"]) == 0


class TestReports:
    def test_structured_document(self, tmp_path, capsys):
        out = tmp_path / "rep.json"
        run(["verify-symmetry", "--pde", "u_t = D(u,x,2)",
             "--field", "Dt", "--out", str(out)])
        doc = json.loads(out.read_text())
        assert set(doc) == {"tool_version", "command", "inputs", "verdict",
                            "certificates", "seed"}
        assert doc["verdict"] == "symmetry"

    def test_byte_identical_reports(self, tmp_path, capsys):
        a, b = tmp_path / "a.json", tmp_path / "b.json"
        args = ["optimal-system", "--algebra", "case:eq5",
                "--params", "m=2,p=3", "--samples", "150", "--seed", "42"]
        run(args + ["--out", str(a)])
        run(args + ["--out", str(b)])
        assert a.read_bytes() == b.read_bytes()

    def test_seed_recorded(self, tmp_path, capsys):
        out = tmp_path / "rep.json"
        run(["optimal-system", "--algebra", "case:eq5",
             "--params", "m=2,p=3", "--samples", "100", "--seed", "7",
             "--out", str(out)])
        assert json.loads(out.read_text())["seed"] == 7
