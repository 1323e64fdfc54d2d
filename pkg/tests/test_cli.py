import json
import math

import pytest

from loccwork import graphs, lab
from loccwork.cli import cli_main

LN2 = 0.6931471805599453


def run(capsys, *argv):
    code = cli_main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def parse_kv(out):
    pairs = {}
    for line in out.splitlines():
        key, _, value = line.partition(" ")
        pairs[key] = value
    return pairs


class TestExitCodes:
    def test_help_exits_zero(self, capsys):
        code, out, _ = run(capsys, "--help")
        assert code == 0
        assert "work" in out

    def test_no_arguments_is_usage_error(self, capsys):
        assert run(capsys)[0] == 1

    def test_unknown_subcommand(self, capsys):
        assert run(capsys, "transmute")[0] == 1

    def test_unknown_flag(self, capsys):
        assert run(capsys, "work", "--state", "ghz", "--n", "3", "--frobnicate")[0] == 1

    def test_missing_required_flag(self, capsys):
        assert run(capsys, "work", "--n", "3")[0] == 1

    def test_semantic_error_exits_one(self, capsys):
        code, _, err = run(capsys, "eg", "--state", "haar", "--n", "30", "--seed", "1",
                           "--method", "bruteforce")
        assert code == 1
        assert "usage error" in err
        assert "bruteforce" in err and "4" in err

    def test_runtime_error_exits_two(self, capsys):
        code, _, err = run(capsys, "work", "--state", "graph", "--graph-file", "/no/such/file")
        assert code == 2
        assert "error" in err


class TestWork:
    def test_ghz4(self, capsys):
        code, out, _ = run(capsys, "work", "--state", "ghz", "--n", "4")
        assert code == 0
        kv = parse_kv(out)
        assert float(kv["w_global"]) == pytest.approx(4 * LN2, abs=1e-12)
        assert float(kv["w_local"]) == pytest.approx(0.0, abs=1e-9)
        assert float(kv["eg_value"]) == pytest.approx(LN2, abs=1e-8)
        assert float(kv["w_locc_upper"]) == pytest.approx(3 * LN2, abs=1e-8)
        assert float(kv["w_locc_lower"]) == pytest.approx(3 * LN2, abs=1e-9)

    def test_eg_none_skips_upper(self, capsys):
        code, out, _ = run(capsys, "work", "--state", "plus", "--n", "3",
                           "--eg-method", "none")
        assert code == 0
        kv = parse_kv(out)
        assert "eg_value" not in kv
        assert float(kv["w_locc_lower"]) == pytest.approx(3 * LN2, abs=1e-9)

    def test_haar_needs_seed(self, capsys):
        assert run(capsys, "work", "--state", "haar", "--n", "3")[0] == 1

    def test_named_state_needs_n(self, capsys):
        assert run(capsys, "work", "--state", "ghz")[0] == 1

    def test_site_cap(self, capsys):
        assert run(capsys, "work", "--state", "ghz", "--n", "40", "--eg-method", "none")[0] == 1

    def test_graph_state_menu(self, capsys, tmp_path):
        gfile = tmp_path / "c6.graph"
        graphs.save_graph(graphs.gen_lattice("cycle", (6,)), gfile)
        code, out, _ = run(capsys, "work", "--state", "graph", "--graph-file", str(gfile),
                           "--eg-method", "none")
        assert code == 0
        kv = parse_kv(out)
        assert float(kv["w_locc_lower"]) == pytest.approx(3 * LN2, abs=1e-9)
        assert kv["best_protocol"] == "independent-set"


class TestEg:
    def test_product_state_zero(self, capsys):
        code, out, _ = run(capsys, "eg", "--state", "zero", "--n", "3")
        assert code == 0
        kv = parse_kv(out)
        assert float(kv["eg_value"]) == pytest.approx(0.0, abs=1e-9)

    def test_schmidt_on_two_qubits(self, capsys):
        code, out, _ = run(capsys, "eg", "--state", "ghz", "--n", "2",
                           "--method", "schmidt")
        assert code == 0
        kv = parse_kv(out)
        assert float(kv["eg_value"]) == pytest.approx(LN2, abs=1e-12)
        assert kv["eg_cert"] == "schmidt_exact"

    def test_schmidt_cut_flag(self, capsys):
        code, out, _ = run(capsys, "eg", "--state", "ghz", "--n", "4",
                           "--method", "schmidt", "--cut", "0,1")
        assert code == 0
        kv = parse_kv(out)
        assert float(kv["eg_value"]) == pytest.approx(LN2, abs=1e-12)
        assert kv["eg_cert"] == "cut_lower_bound"

    def test_bruteforce_w3(self, capsys):
        code, out, _ = run(capsys, "eg", "--state", "w", "--n", "3",
                           "--method", "bruteforce", "--grid", "24")
        assert code == 0
        kv = parse_kv(out)
        assert float(kv["eg_value"]) == pytest.approx(math.log(9 / 4), abs=1e-6)
        assert kv["eg_cert"] == "bruteforce_certified"

    def test_bad_n(self, capsys):
        assert run(capsys, "eg", "--state", "ghz", "--n", "0")[0] == 1


class TestProtocol:
    def write_protocol(self, tmp_path, body):
        path = tmp_path / "proto.txt"
        path.write_text(body)
        return str(path)

    def test_z_rounds_on_ghz(self, capsys, tmp_path):
        path = self.write_protocol(tmp_path, "sites 2\nround Z Z\n")
        code, out, _ = run(capsys, "protocol", "--file", path, "--state", "ghz", "--n", "2")
        assert code == 0
        kv = parse_kv(out)
        assert int(kv["leaves"]) == 2
        assert float(kv["work"]) == pytest.approx(LN2, abs=1e-9)
        assert float(kv["outcome_entropy"]) == pytest.approx(LN2, abs=1e-9)
        assert float(kv["dropped_mass"]) == 0.0

    def test_site_count_mismatch(self, capsys, tmp_path):
        path = self.write_protocol(tmp_path, "sites 2\nround Z Z\n")
        assert run(capsys, "protocol", "--file", path, "--state", "ghz", "--n", "3")[0] == 1

    def test_missing_file(self, capsys):
        assert run(capsys, "protocol", "--file", "/no/such.txt",
                   "--state", "ghz", "--n", "2")[0] == 2

    def test_malformed_file(self, capsys, tmp_path):
        path = self.write_protocol(tmp_path, "sites two\n")
        assert run(capsys, "protocol", "--file", path, "--state", "ghz", "--n", "2")[0] == 2

    def test_bad_prune(self, capsys, tmp_path):
        path = self.write_protocol(tmp_path, "sites 2\nround Z Z\n")
        assert run(capsys, "protocol", "--file", path, "--state", "ghz", "--n", "2",
                   "--prune", "0.5")[0] == 1


class TestGraphGen:
    def test_cycle(self, capsys, tmp_path):
        out_path = tmp_path / "c6.graph"
        code, out, _ = run(capsys, "graph", "gen", "--kind", "cycle", "--dims", "6",
                           "--output", str(out_path))
        assert code == 0
        kv = parse_kv(out)
        assert kv["vertices"] == "6" and kv["edges"] == "6" and kv["max_degree"] == "2"
        g = graphs.load_graph(out_path)
        assert g == graphs.gen_lattice("cycle", (6,))

    def test_random(self, capsys, tmp_path):
        out_path = tmp_path / "r.graph"
        code, out, _ = run(capsys, "graph", "gen", "--kind", "random", "--n", "8",
                           "--seed", "3", "--output", str(out_path))
        assert code == 0
        assert graphs.load_graph(out_path) == graphs.gen_random_graph(8, 3)

    def test_random_needs_seed(self, capsys, tmp_path):
        assert run(capsys, "graph", "gen", "--kind", "random", "--n", "8",
                   "--output", str(tmp_path / "x"))[0] == 1

    def test_lattice_needs_dims(self, capsys, tmp_path):
        assert run(capsys, "graph", "gen", "--kind", "cycle",
                   "--output", str(tmp_path / "x"))[0] == 1

    def test_bad_dims_is_runtime_error(self, capsys, tmp_path):
        assert run(capsys, "graph", "gen", "--kind", "cycle", "--dims", "2",
                   "--output", str(tmp_path / "x"))[0] == 2


class TestExperiment:
    def test_scaling_end_to_end(self, capsys, tmp_path):
        out_csv = tmp_path / "rows.csv"
        cfg = {
            "ensemble": {"kind": "haar"},
            "n_values": [2, 3],
            "samples": 2,
            "seed": 5,
            "output": str(out_csv),
            "estimators": {"eg": {"method": "alternating", "restarts": 4},
                           "protocols": ["refined-null"]},
        }
        cfg_path = tmp_path / "cfg.json"
        cfg_path.write_text(json.dumps(cfg))
        code, out, _ = run(capsys, "experiment", "scaling", "--config", str(cfg_path))
        assert code == 0
        assert "wrote 4 rows" in out
        assert "w_local_slope" in out
        rows = lab.read_report(out_csv)
        assert [(r.n, r.sample) for r in rows] == [(2, 0), (2, 1), (3, 0), (3, 1)]

    def test_scaling_stdout_when_no_output(self, capsys, tmp_path):
        cfg = {
            "ensemble": {"kind": "haar"},
            "n_values": [2],
            "samples": 1,
            "seed": 5,
            "estimators": {"protocols": []},
        }
        cfg_path = tmp_path / "cfg.json"
        cfg_path.write_text(json.dumps(cfg))
        code, out, _ = run(capsys, "experiment", "scaling", "--config", str(cfg_path))
        assert code == 0
        assert out.splitlines()[0] == lab.CSV_HEADER

    def test_scaling_missing_config(self, capsys):
        assert run(capsys, "experiment", "scaling", "--config", "/no/cfg.json")[0] == 2

    def test_scaling_bad_config_is_runtime_error(self, capsys, tmp_path):
        cfg_path = tmp_path / "cfg.json"
        cfg_path.write_text(json.dumps({"ensemble": {"kind": "ising"},
                                        "n_values": [2], "samples": 1, "seed": 0}))
        assert run(capsys, "experiment", "scaling", "--config", str(cfg_path))[0] == 2

    def test_tail_stdout(self, capsys):
        code, out, _ = run(capsys, "experiment", "tail", "--ensemble", "haar",
                           "--n", "4", "--samples", "1000", "--alphas", "1,2",
                           "--seed", "0")
        assert code == 0
        lines = out.splitlines()
        assert lines[0] == lab.TAIL_CSV_HEADER
        assert len(lines) == 3

    def test_tail_output_file(self, capsys, tmp_path):
        out_path = tmp_path / "tail.csv"
        code, out, _ = run(capsys, "experiment", "tail", "--ensemble", "circuit",
                           "--n", "3", "--samples", "1000", "--alphas", "4",
                           "--seed", "1", "--depth", "2", "--design-order", "2",
                           "--output", str(out_path))
        assert code == 0
        assert out_path.exists()

    def test_tail_circuit_needs_depth(self, capsys):
        assert run(capsys, "experiment", "tail", "--ensemble", "circuit",
                   "--n", "3", "--samples", "1000", "--alphas", "4",
                   "--seed", "1")[0] == 1

    def test_tail_bad_alphas(self, capsys):
        assert run(capsys, "experiment", "tail", "--ensemble", "haar",
                   "--n", "4", "--samples", "1000", "--alphas", "1,-2",
                   "--seed", "0")[0] == 1

    def test_tail_too_few_samples(self, capsys):
        assert run(capsys, "experiment", "tail", "--ensemble", "haar",
                   "--n", "4", "--samples", "10", "--alphas", "1",
                   "--seed", "0")[0] == 2
