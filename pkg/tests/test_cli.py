import json
from fractions import Fraction

import pytest

from entroflow.cli import main
from entroflow.entropy import EntropyVector
from entroflow.gadgets import quasi_uniform_library
from entroflow.network import serialize

from test_network import simple_problem


def write(tmp_path, name, text):
    path = tmp_path / name
    path.write_text(text)
    return str(path)


def h_file(tmp_path, values, name="h.json"):
    return write(
        tmp_path, name, EntropyVector.from_tuple([Fraction(v) for v in values]).to_json()
    )


def single_edge_file(tmp_path, rate="1", cap="1"):
    p = simple_problem([("e", "s", "t", cap)], [("S", Fraction(rate), "s", ("t",))])
    return write(tmp_path, "problem.json", serialize(p))


class TestCheckEntropic:
    def test_witness_found(self, tmp_path, capsys):
        assert main(["check-entropic", h_file(tmp_path, [1, 1, 2])]) == 0
        assert "PASS witness" in capsys.readouterr().out

    def test_not_polymatroid(self, tmp_path, capsys):
        assert main(["check-entropic", h_file(tmp_path, [1, 1, 3])]) == 2
        assert "FAIL polymatroid" in capsys.readouterr().out

    def test_duplicated_bit(self, tmp_path):
        assert main(["check-entropic", h_file(tmp_path, [1, 1, 1])]) == 0

    def test_budget(self, tmp_path):
        code = main(
            ["check-entropic", h_file(tmp_path, [1, 1, 1, 2, 2, 2, 2]), "--budget", "2"]
        )
        assert code == 3

    def test_parse_error(self, tmp_path):
        bad = write(tmp_path, "bad.json", "{not json")
        assert main(["check-entropic", bad]) == 64


class TestLpBound:
    def test_objective(self, tmp_path, capsys):
        assert main(
            ["lp-bound", single_edge_file(tmp_path), "--objective", "H(S)"]
        ) == 0
        assert "H(S) = 1" in capsys.readouterr().out

    def test_infeasible(self, tmp_path, capsys):
        assert main(["lp-bound", single_edge_file(tmp_path, rate="2")]) == 1
        out = capsys.readouterr().out
        assert "infeasible" in out

    def test_chain(self, tmp_path, capsys):
        chain = write(
            tmp_path,
            "chain.json",
            json.dumps(
                [
                    {"name": "rate", "claim": "H(S)", "relation": "=", "value": "1"},
                    {"claim": "H(S|e)", "relation": "=", "value": "0"},
                ]
            ),
        )
        assert main(
            ["lp-bound", single_edge_file(tmp_path), "--verify-chain", chain]
        ) == 0
        assert "forced" in capsys.readouterr().out

    def test_ground_too_large(self, tmp_path):
        p = simple_problem(
            [(f"e{i}", "s", "t", 1) for i in range(16)],
            [("S", 1, "s", ("t",))],
        )
        path = write(tmp_path, "big.json", serialize(p))
        assert main(["lp-bound", path, "--objective", "H(S)"]) == 65


class TestSearchCode:
    def test_identity_found(self, tmp_path, capsys):
        out_file = str(tmp_path / "code.json")
        assert main(
            ["search-code", single_edge_file(tmp_path), "--out", out_file]
        ) == 0
        doc = json.loads((tmp_path / "code.json").read_text())
        assert doc["edges"] == {"e": 2}

    def test_secrecy_needs_randomness(self, tmp_path):
        doc = {
            "nodes": ["s", "t"],
            "edges": [{"id": "e", "tail": "s", "head": "t", "capacity": "1"}],
            "sessions": [{"id": "X", "rate": "1", "origin": "s", "sinks": ["t"]}],
            "wiretaps": [{"sources": ["X"], "edges": ["e"]}],
        }
        path = write(tmp_path, "tapped.json", json.dumps(doc))
        assert main(["search-code", path, "--randomness", "off"]) == 1

    def test_budget_exit(self, tmp_path):
        from test_network import butterfly

        path = write(tmp_path, "bf.json", serialize(butterfly()))
        assert main(["search-code", path, "--budget", "5"]) == 3


class TestCheckCode:
    def test_round_trip(self, tmp_path):
        problem_file = single_edge_file(tmp_path)
        out_file = str(tmp_path / "code.json")
        assert main(["search-code", problem_file, "--out", out_file]) == 0
        assert main(["check-code", problem_file, out_file]) == 0


class TestGadget:
    def test_secure_writes_problem_and_contract(self, tmp_path):
        out = str(tmp_path / "sec.json")
        contract = str(tmp_path / "contract.json")
        assert main(
            ["gadget", "secure", "--c", "1", "--d", "2", "--out", out, "--contract", contract]
        ) == 0
        doc = json.loads((tmp_path / "sec.json").read_text())
        assert len(doc["edges"]) == 6
        cdoc = json.loads((tmp_path / "contract.json").read_text())
        assert any(o["name"] == "key-determined-by-relay" for o in cdoc["obligations"])

    def test_incremental(self, tmp_path, capsys):
        assert main(["gadget", "incremental", "--h", h_file(tmp_path, [1, 1, 2])]) == 0
        doc = json.loads(capsys.readouterr().out)
        assert {"id", "tail", "head", "capacity"} <= set(doc["edges"][0])

    def test_bad_parameters(self, tmp_path):
        assert main(["gadget", "secure", "--c", "2", "--d", "1"]) == 64


class TestVerify:
    def test_key_forcing(self, capsys):
        assert main(["verify", "prop1"]) == 0
        out = capsys.readouterr().out
        assert "key-determined-by-relay" in out
        assert "FAIL" not in out

    def test_uniform_witness(self, tmp_path, capsys):
        q = quasi_uniform_library()["independent-bits"]
        path = write(tmp_path, "q.json", q.to_json())
        assert main(["verify", "thm2", "--q", path]) == 0

    def test_incremental_forcing_negative(self, tmp_path, capsys):
        # A non-entropic vector: some subnetwork LP refutes it, either by
        # an outright infeasibility or by a contradicted claim.
        assert main(["verify", "thm1", "--h", h_file(tmp_path, [1, 1, 3])]) == 1
        out = capsys.readouterr().out
        assert "FAIL" in out
        assert "contradicted" in out or "LP infeasible" in out

    def test_unknown_name(self):
        assert main(["verify", "nonsense"]) == 64


class TestReports:
    def test_json_reproducible(self, tmp_path, capsys):
        path = h_file(tmp_path, [1, 1, 2])
        assert main(["--json", "check-entropic", path]) == 0
        first = json.loads(capsys.readouterr().out)
        assert main(["--json", "check-entropic", path]) == 0
        second = json.loads(capsys.readouterr().out)
        first.pop("timing")
        second.pop("timing")
        assert first == second
        assert list(first) == ["command", "inputs", "verdicts", "certificates"]


class TestBudgetEnv:
    def test_env_budget_override(self, tmp_path, monkeypatch):
        monkeypatch.setenv("ENTROFLOW_BUDGET", "2")
        code = main(["check-entropic", h_file(tmp_path, [1, 1, 1, 2, 2, 2, 2])])
        assert code == 3

    def test_missing_file_args(self):
        assert main(["verify", "thm1"]) == 64
        assert main(["verify", "thm2"]) == 64


class TestMoreCliPaths:
    def test_verify_incremental_green(self, tmp_path, capsys):
        assert main(["verify", "thm1", "--h", h_file(tmp_path, [1, 1, 2])]) == 0
        out = capsys.readouterr().out
        assert "FAIL" not in out
        assert "increment[2.1]" in out

    def test_lp_bound_minimize(self, tmp_path, capsys):
        assert main(
            ["lp-bound", single_edge_file(tmp_path), "--objective", "H(S)", "--minimize"]
        ) == 0
        assert "H(S) = 1" in capsys.readouterr().out

    def test_lp_bound_dump_and_no_reduce(self, tmp_path, capsys):
        assert main(
            ["lp-bound", single_edge_file(tmp_path), "--dump-lp", "--no-reduce"]
        ) == 0
        out = capsys.readouterr().out
        assert "# Shannon LP over" in out
        assert "unreduced" in out

    def test_search_code_threads(self, tmp_path):
        from test_network import butterfly
        from entroflow.network import serialize

        path = write(tmp_path, "bf.json", serialize(butterfly()))
        assert main(["search-code", path, "--threads", "2"]) == 0

    def test_verify_adhesion_demo(self, capsys):
        assert main(["verify", "thm4-demo"]) == 0
        out = capsys.readouterr().out
        assert "unit-relay-composition" in out
        assert "half-capacity-infeasible" in out
