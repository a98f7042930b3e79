"""File formats, generators, the benchmark harness, and CLI exit codes."""

import csv
import json
from fractions import Fraction as F

import pytest
from hypothesis import given, settings, strategies as st

from idlepack.bench import load_config, run_benchmark, write_csv
from idlepack.cli import main
from idlepack.gen import GenSpec, generate_instance
from idlepack.ioformat import (
    FormatError,
    InstanceFile,
    SolutionFile,
    emit_instance,
    emit_solution,
    parse_instance_text,
    parse_solution_text,
    verify_solution,
)


def packing_files():
    sizes = st.lists(
        st.fractions(min_value=0, max_value=1, max_denominator=24), max_size=8
    )
    U = st.fractions(min_value=F(1, 16), max_value=1, max_denominator=16)
    return st.builds(
        lambda k, u, ss: InstanceFile("packing", k, u, tuple(ss)),
        st.integers(1, 5),
        U,
        sizes,
    )


def scheduling_files():
    sizes = st.lists(
        st.fractions(min_value=0, max_value=3, max_denominator=24), max_size=8
    )
    U = st.fractions(min_value=0, max_value=2, max_denominator=16)
    return st.builds(
        lambda k, u, ss, m: InstanceFile("scheduling", k, u, tuple(ss), m=m),
        st.integers(1, 5),
        U,
        sizes,
        st.integers(1, 4),
    )


class TestInstanceFormat:
    @given(f=st.one_of(packing_files(), scheduling_files()))
    @settings(max_examples=60, deadline=None)
    def test_round_trip_is_identity(self, f):
        assert parse_instance_text(emit_instance(f)) == f

    def test_decimal_and_slash_both_exact(self):
        text = '{"kind": "packing", "k": 2, "U": "0.25", "sizes": ["1/3", "0.2"]}'
        f = parse_instance_text(text)
        assert f.U == F(1, 4)
        assert f.sizes == (F(1, 3), F(1, 5))

    def test_packing_U_out_of_range_names_field(self):
        text = '{"kind": "packing", "k": 2, "U": "3/2", "sizes": ["1/2"]}'
        with pytest.raises(FormatError) as e:
            parse_instance_text(text)
        assert e.value.field == "U"

    def test_binary_float_rejected(self):
        text = '{"kind": "packing", "k": 1, "U": "1", "sizes": [0.25]}'
        with pytest.raises(FormatError) as e:
            parse_instance_text(text)
        assert e.value.field == "sizes[0]"

    def test_missing_and_unknown_fields_named(self):
        with pytest.raises(FormatError) as e:
            parse_instance_text('{"kind": "packing", "U": "1", "sizes": []}')
        assert e.value.field == "k"
        with pytest.raises(FormatError) as e:
            parse_instance_text('{"kind": "packing", "k": 1, "U": "1", "sizes": [], "mm": 3}')
        assert e.value.field == "mm"

    def test_m_only_for_scheduling(self):
        with pytest.raises(FormatError) as e:
            parse_instance_text('{"kind": "packing", "k": 1, "U": "1", "sizes": [], "m": 2}')
        assert e.value.field == "m"
        with pytest.raises(FormatError) as e:
            parse_instance_text('{"kind": "scheduling", "k": 1, "U": "1", "sizes": []}')
        assert e.value.field == "m"

    def test_empty_file_is_valid_but_not_an_instance(self):
        f = parse_instance_text('{"kind": "packing", "k": 2, "U": "1/2", "sizes": []}')
        assert f.n == 0
        with pytest.raises(FormatError):
            f.to_instance()


class TestSolutionFormat:
    def test_round_trip_scheduling(self):
        sol = SolutionFile("scheduling", ((0, 2), (1,), ()), makespan=F(7, 2))
        assert parse_solution_text(emit_solution(sol)) == sol

    def test_round_trip_packing(self):
        sol = SolutionFile("packing", ((1, 0), (2,)))
        assert parse_solution_text(emit_solution(sol)) == sol

    def test_verify_catches_wrong_makespan(self):
        f = InstanceFile("scheduling", 1, F(0), (F(1), F(2)), m=2)
        good = SolutionFile("scheduling", ((0,), (1,)), makespan=F(2))
        assert verify_solution(f, good) == []
        inflated = SolutionFile("scheduling", ((0,), (1,)), makespan=F(3))
        assert any("differs" in v for v in verify_solution(f, inflated))

    def test_verify_catches_overfull_bin(self):
        f = InstanceFile("packing", 2, F(1, 2), (F(3, 4), F(1, 2)))
        bad = SolutionFile("packing", ((0, 1),))
        assert any("exceeds" in v for v in verify_solution(f, bad))
        assert verify_solution(f, SolutionFile("packing", ((0,), (1,)))) == []


class TestGenerator:
    def test_fixed_seed_reproduces_bytes(self):
        spec = GenSpec("packing", 9, 2, F(1, 2), dist="clustered", seed=41)
        assert emit_instance(generate_instance(spec)) == emit_instance(generate_instance(spec))

    def test_seeds_decorrelate(self):
        a = generate_instance(GenSpec("packing", 9, 2, F(1, 2), seed=0))
        b = generate_instance(GenSpec("packing", 9, 2, F(1, 2), seed=1))
        assert a.sizes != b.sizes

    def test_empty_instance_is_valid(self):
        f = generate_instance(GenSpec("scheduling", 0, 3, F(1), m=2))
        assert f.n == 0
        assert parse_instance_text(emit_instance(f)) == f

    @pytest.mark.parametrize("n,k", [(0, 2), (4, 2), (7, 2), (5, 3), (9, 4)])
    def test_adversarial_count_is_one_mod_k(self, n, k):
        f = generate_instance(GenSpec("packing", n, k, F(1, 4), dist="adversarial", seed=n))
        assert f.n == 0 or f.n % k == 1

    def test_adversarial_sizes_sit_under_threshold(self):
        f = generate_instance(GenSpec("packing", 7, 2, F(1, 4), dist="adversarial", seed=1))
        base = (1 - F(1, 4)) / 3
        assert all(0 < s <= base for s in f.sizes)

    def test_all_distributions_yield_valid_instances(self):
        for dist in ("uniform", "clustered", "adversarial"):
            for kind, m in (("packing", None), ("scheduling", 2)):
                f = generate_instance(GenSpec(kind, 6, 2, F(1, 2), dist=dist, seed=7, m=m))
                if f.sizes:
                    f.to_instance()

    def test_unknown_distribution_named(self):
        with pytest.raises(FormatError) as e:
            GenSpec("packing", 3, 1, F(1), dist="gaussian")
        assert e.value.field == "dist"


def write_config(tmp_path, instances, eps="1/2", oracle=None):
    cfg = {"eps": eps, "csv": "report.csv", "instances": instances}
    if oracle:
        cfg["oracle"] = oracle
    path = tmp_path / "bench.json"
    path.write_text(json.dumps(cfg))
    return path


def read_report(tmp_path):
    with open(tmp_path / "report.csv", newline="") as f:
        return list(csv.reader(f))


class TestBench:
    def test_empty_set_yields_header_only(self, tmp_path):
        cfg = load_config(write_config(tmp_path, []))
        report = run_benchmark(cfg)
        write_csv(report, cfg.csv_path)
        rows = read_report(tmp_path)
        assert rows == [list(map(str, ("seed", "n", "m", "k", "U", "eps", "algorithm", "oracle", "ratio", "wall_time")))]

    def test_no_plots_skips_figures(self, tmp_path):
        cfg_path = write_config(tmp_path, [])
        assert main(["bench", "--config", str(cfg_path), "--no-plots"]) == 0
        assert (tmp_path / "report.csv").exists()
        assert not list(tmp_path.glob("*.png"))

    def test_rows_within_bounds_and_figures_exist(self, tmp_path):
        cfg_path = write_config(
            tmp_path,
            [
                {"kind": "packing", "n": 6, "k": 2, "U": "1/2", "seed": 1},
                {"kind": "packing", "n": 5, "k": 3, "U": "1/4", "dist": "adversarial", "seed": 2},
                {"kind": "scheduling", "n": 6, "m": 2, "k": 2, "U": "1/3", "dist": "clustered", "seed": 3},
            ],
        )
        assert main(["bench", "--config", str(cfg_path)]) == 0
        rows = read_report(tmp_path)
        assert len(rows) == 4
        for row in rows[1:]:
            assert row[8] != ""  # oracle reached every instance here
        assert (tmp_path / "report_ratio.png").exists()
        assert (tmp_path / "report_time.png").exists()

    def test_exceeded_row_kept_with_blank_ratio(self, tmp_path):
        cfg_path = write_config(
            tmp_path,
            [{"kind": "scheduling", "n": 15, "m": 3, "k": 2, "U": "1/2", "seed": 4}],
            oracle={"max_jobs": 10},
        )
        assert main(["bench", "--config", str(cfg_path)]) == 0
        rows = read_report(tmp_path)
        assert rows[1][7] == "Exceeded" and rows[1][8] == ""

    def test_workers_env_preserves_rows(self, tmp_path, monkeypatch):
        instances = [
            {"kind": "packing", "n": 5, "k": 2, "U": "1/2", "seed": s} for s in range(3)
        ]
        cfg = load_config(write_config(tmp_path, instances))
        serial = run_benchmark(cfg)
        monkeypatch.setenv("IDLEPACK_WORKERS", "2")
        parallel = run_benchmark(cfg)
        strip = lambda rows: [r[:-1] for r in rows]  # wall time is not comparable
        assert strip(parallel.rows) == strip(serial.rows)
        assert not serial.violations and not parallel.violations

    def test_config_errors_name_field(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text('{"eps": "1/2", "instances": []}')
        with pytest.raises(FormatError) as e:
            load_config(path)
        assert e.value.field == "csv"


class TestCLI:
    def run_gen(self, tmp_path, name, *args):
        target = tmp_path / name
        assert main(["gen", "--output", str(target), *args]) == 0
        return target

    def test_solve_pack_round_trip(self, tmp_path):
        inst = self.run_gen(
            tmp_path, "p.json", "--kind", "packing", "--n", "8", "--k", "2", "--U", "1/2", "--seed", "3"
        )
        sol = tmp_path / "p.sol"
        assert main(["solve-pack", "--eps", "1/2", "--input", str(inst), "--output", str(sol)]) == 0
        assert main(["verify", "--input", str(inst), "--solution", str(sol)]) == 0

    def test_solve_sched_round_trip(self, tmp_path):
        inst = self.run_gen(
            tmp_path, "s.json", "--kind", "scheduling", "--n", "7", "--m", "2",
            "--k", "2", "--U", "1/3", "--seed", "5",
        )
        sol = tmp_path / "s.sol"
        assert main(["solve-sched", "--eps", "1/2", "--input", str(inst), "--output", str(sol)]) == 0
        assert main(["verify", "--input", str(inst), "--solution", str(sol)]) == 0

    def test_oracle_solutions_verify(self, tmp_path):
        inst = self.run_gen(
            tmp_path, "p.json", "--kind", "packing", "--n", "7", "--k", "3", "--U", "1/4", "--seed", "2"
        )
        sol = tmp_path / "p.opt"
        assert main(["oracle-pack", "--input", str(inst), "--output", str(sol)]) == 0
        assert main(["verify", "--input", str(inst), "--solution", str(sol)]) == 0

    def test_invalid_input_exits_2(self, tmp_path):
        bad = tmp_path / "bad.json"
        bad.write_text('{"kind": "packing", "k": 2, "U": "3/2", "sizes": ["1/2"]}')
        assert main(["solve-pack", "--eps", "1/2", "--input", str(bad)]) == 2
        assert main(["solve-pack", "--eps", "1/2", "--input", str(tmp_path / "missing.json")]) == 2

    def test_kind_mismatch_exits_2(self, tmp_path):
        inst = self.run_gen(
            tmp_path, "p.json", "--kind", "packing", "--n", "3", "--k", "2", "--U", "1/2"
        )
        assert main(["solve-sched", "--eps", "1/2", "--input", str(inst)]) == 2

    def test_oracle_limit_exits_3(self, tmp_path):
        inst = self.run_gen(
            tmp_path, "big.json", "--kind", "scheduling", "--n", "13", "--m", "2",
            "--k", "2", "--U", "1/2",
        )
        assert main(["oracle-sched", "--input", str(inst)]) == 3

    def test_tampered_solution_exits_2(self, tmp_path):
        inst = self.run_gen(
            tmp_path, "p.json", "--kind", "packing", "--n", "6", "--k", "2", "--U", "1/2", "--seed", "9"
        )
        sol = tmp_path / "p.sol"
        assert main(["solve-pack", "--eps", "1", "--input", str(inst), "--output", str(sol)]) == 0
        body = json.loads(sol.read_text())
        body["bins"] = [sum(body["bins"], [])]  # cram everything into one bin
        sol.write_text(json.dumps(body))
        assert main(["verify", "--input", str(inst), "--solution", str(sol)]) == 2

    def test_empty_instance_solves_to_empty_solution(self, tmp_path):
        inst = self.run_gen(
            tmp_path, "e.json", "--kind", "scheduling", "--n", "0", "--m", "2", "--k", "1", "--U", "0"
        )
        sol = tmp_path / "e.sol"
        assert main(["solve-sched", "--eps", "1", "--input", str(inst), "--output", str(sol)]) == 0
        assert main(["verify", "--input", str(inst), "--solution", str(sol)]) == 0

    def test_gen_writes_parseable_stdout(self, tmp_path, capsys):
        assert main(["gen", "--kind", "packing", "--n", "4", "--k", "2", "--U", "2/3"]) == 0
        f = parse_instance_text(capsys.readouterr().out)
        assert f.n == 4 and f.U == F(2, 3)