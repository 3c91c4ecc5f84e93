import itertools
import random
import subprocess
import sys

import numpy as np
import pytest

from dmed import engine
from dmed.harness import cli
from dmed.harness.config import (
    ConfigError,
    load_config,
    parse_config,
    reference_config,
    serialize_config,
)
from dmed.harness.experiment import (
    CSV_COLUMNS,
    AggregateSeries,
    aggregate,
    emit_csv,
    read_csv,
    run_experiment,
    run_trials,
)
from dmed.seeding import DROPOUT, OBSERVATION, substream, trial_seed
from dmed.topology import StaticGraph, write_edgelist

SMALL_INI = """\
[graph]
source = file
path = ring.edges

[network]
p_drop = 0.2

[observation]
theta = 1, 4, 2, 8, 5, 7
v0 = 3
delta = 1
noise_sigma = 1

[schedule]
alpha0 = 1
tau1 = 0.6
beta0 = 0.1
tau2 = 0.2
gamma0 = 20
tau3 = 0.3
c_mu = 10
mu = 0.9
eps_bar = 0.1

[run]
x0 = 0
t_max = 200
n_trials = 3
base_seed = 5
record_every = 20
"""


@pytest.fixture
def small_config(tmp_path):
    write_edgelist(StaticGraph.from_edges(6, [(i, (i + 1) % 6) for i in range(6)]), tmp_path / "ring.edges")
    path = tmp_path / "small.ini"
    path.write_text(SMALL_INI)
    return path


class TestConfig:
    def test_round_trip(self, small_config):
        cfg = load_config(small_config)
        again = parse_config(serialize_config(cfg))
        assert serialize_config(again) == serialize_config(cfg)
        assert again.schedule == cfg.schedule
        np.testing.assert_array_equal(again.observation.theta, cfg.observation.theta)
        assert (again.t_max, again.n_trials, again.base_seed, again.record_every) == (200, 3, 5, 20)

    def test_reference_round_trip(self):
        cfg = reference_config()
        assert serialize_config(parse_config(serialize_config(cfg))) == serialize_config(cfg)

    def test_relative_edge_list_resolved(self, small_config):
        assert load_config(small_config).setup().graph.n_nodes == 6

    @pytest.mark.parametrize("mutation", [
        ("noise_sigma = 1", "noise_sigma = 1\nnoise = cauchy"),
        ("source = file", "source = lattice"),
        ("tau1 = 0.6", "tau1 = sixty"),
        ("theta = 1, 4, 2, 8, 5, 7", "theta = 1, 4, 4, 8, 5, 7"),
    ])
    def test_malformed(self, small_config, mutation):
        with pytest.raises(ConfigError):
            parse_config(SMALL_INI.replace(*mutation))

    def test_problems_reported(self, small_config):
        cfg = parse_config(SMALL_INI.replace("tau3 = 0.3", "tau3 = 0.5"))
        assert any("tau3" in p for p in cfg.problems())
        with pytest.raises(ConfigError):
            cfg.setup()


class TestSeeding:
    def test_substreams_distinct(self):
        # first draws of every (base, trial, purpose, agent) stream
        firsts = set()
        keys = list(itertools.product(range(4), range(25), (OBSERVATION, DROPOUT), range(10)))
        for base, trial, purpose, agent in keys:
            firsts.add(substream(trial_seed(base, trial), purpose, agent).integers(0, 2**63))
        assert len(firsts) == len(keys)

    def test_trial_streams_independent_of_order(self):
        a = substream(trial_seed(3, 7), OBSERVATION, 2).standard_normal(5)
        substream(trial_seed(3, 6), OBSERVATION, 2).standard_normal(100)
        b = substream(trial_seed(3, 7), OBSERVATION, 2).standard_normal(5)
        assert np.array_equal(a, b)


def _setup(small_config):
    return load_config(small_config).setup()


class TestAggregate:
    def test_invariant_to_trial_order(self, small_config):
        trajs = run_trials(_setup(small_config), 200, 6, base_seed=1)
        ref = aggregate(trajs)
        shuffled = list(trajs)
        random.Random(0).shuffle(shuffled)
        out = aggregate(shuffled)
        for name in ref.mean:
            assert np.array_equal(ref.mean[name], out.mean[name])
            assert np.array_equal(ref.std[name], out.std[name])

    def test_single_trial_equals_run(self, small_config):
        setup = _setup(small_config)
        series = aggregate(run_trials(setup, 200, 1, base_seed=9))
        traj = engine.run(setup, 200, trial_seed(9, 0))
        for name in series.mean:
            assert np.array_equal(series.mean[name], traj.columns[name])
            assert np.all(series.std[name] == 0)

    def test_constant_metric(self):
        t = np.arange(3)
        col = np.full(3, 0.1)
        trajs = []
        for _ in range(7):
            tr = engine.Trajectory.__new__(engine.Trajectory)
            tr.t, tr.columns = t, {k: col.copy() for k in AggregateSeries.empty().mean}
            trajs.append(tr)
        out = aggregate(trajs)
        assert np.all(out.mean["rms_dist"] == 0.1)
        assert np.all(out.std["rms_dist"] == 0.0)

    def test_parallel_matches_serial(self, small_config):
        setup = _setup(small_config)
        a = aggregate(run_trials(setup, 100, 3, 2, workers=1))
        b = aggregate(run_trials(setup, 100, 3, 2, workers=2))
        for name in a.mean:
            assert np.array_equal(a.mean[name], b.mean[name])


class TestCsv:
    def test_empty_is_header_only(self, tmp_path):
        emit_csv(AggregateSeries.empty(), tmp_path / "e.csv")
        assert (tmp_path / "e.csv").read_text() == ",".join(CSV_COLUMNS) + "\n"
        assert len(read_csv(tmp_path / "e.csv")) == 0

    def test_round_trip_and_rows(self, small_config, tmp_path):
        series = run_experiment(load_config(small_config))
        emit_csv(series, tmp_path / "a.csv")
        back = read_csv(tmp_path / "a.csv")
        assert back.t.tolist() == list(range(0, 201, 20))
        assert back.n_trials == 3
        for name in series.mean:
            assert np.array_equal(back.mean[name], series.mean[name])
        assert np.array_equal(back.std["rms_dist"], series.std["rms_dist"])

    def test_byte_identical_reruns(self, small_config, tmp_path):
        for name in ("a.csv", "b.csv"):
            emit_csv(run_experiment(load_config(small_config)), tmp_path / name)
        assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()

    def test_unwritable_path(self, tmp_path):
        with pytest.raises(OSError, match="cannot write"):
            emit_csv(AggregateSeries.empty(), tmp_path / "missing" / "x.csv")


class TestCli:
    def test_validate_reference(self, tmp_path, capsys):
        path = tmp_path / "ref.ini"
        path.write_text(serialize_config(reference_config()))
        assert cli.main(["validate", str(path)]) == 0
        out = capsys.readouterr().out
        assert "delta0=0.9" in out and "= 0.4 " in out and "ok" in out

    def test_validate_rejects_tau3(self, tmp_path, capsys):
        path = tmp_path / "bad.ini"
        path.write_text(serialize_config(reference_config()).replace("tau3 = 0.3", "tau3 = 0.5"))
        assert cli.main(["validate", str(path)]) != 0
        assert "violated: tau3" in capsys.readouterr().out

    def test_graph_info_path(self, tmp_path, capsys):
        write_edgelist(StaticGraph.path(3), tmp_path / "p3.edges")
        assert cli.main(["graph", "info", str(tmp_path / "p3.edges")]) == 0
        out = capsys.readouterr().out
        assert "n_nodes=3" in out and "edges=2" in out and "lambda2=1\n" in out

    def test_graph_gen(self, tmp_path, capsys):
        out = tmp_path / "g.edges"
        assert cli.main(["graph", "gen", "--nodes", "20", "--target-lambda2", "2",
                         "--seed", "1", "--out", str(out)]) == 0
        assert cli.main(["graph", "info", str(out)]) == 0
        lam = float(capsys.readouterr().out.split("lambda2=")[-1])
        assert abs(lam - 2) <= 0.5

    def test_simulate(self, small_config, tmp_path):
        out = tmp_path / "run.csv"
        assert cli.main(["simulate", str(small_config), "--out", str(out)]) == 0
        assert out.read_text().splitlines()[0] == ",".join(CSV_COLUMNS)

    def test_lemma1(self, tmp_path):
        out = tmp_path / "l.csv"
        assert cli.main(["lemma1", "--a1", "1", "--mu", "0.9", "--a2", "10", "--delta", "1",
                         "--sigma", "2", "--tmax", "1000", "--trials", "5", "--out", str(out)]) == 0
        rows = out.read_text().splitlines()
        assert rows[0] == "t,scaled_median,scaled_mean,z_abs_median,n_trials"
        assert len(rows) == 1 + 101

    @pytest.mark.parametrize("argv", [
        [], ["simulate"], ["graph", "info"], ["lemma1", "--a1", "1"], ["bogus"],
        ["lemma1", "--a1", "1", "--mu", "1.5", "--a2", "0", "--delta", "1",
         "--sigma", "0", "--tmax", "3", "--out", "/dev/null"],
    ])
    def test_usage_errors(self, argv):
        assert cli.main(argv) == 1

    def test_missing_files(self, tmp_path):
        assert cli.main(["validate", str(tmp_path / "nope.ini")]) == 1
        assert cli.main(["graph", "info", str(tmp_path / "nope.edges")]) != 0

    def test_unreachable_target_is_runtime_error(self, tmp_path):
        # no 5-node graph has lambda2 strictly between 4 and 5
        assert cli.main(["graph", "gen", "--nodes", "5", "--target-lambda2", "4.5",
                         "--tolerance", "0.1", "--out", str(tmp_path / "x")]) == 2

    def test_impossible_target_is_usage_error(self, tmp_path):
        assert cli.main(["graph", "gen", "--nodes", "5", "--target-lambda2", "50",
                         "--out", str(tmp_path / "x")]) == 1

    def test_module_entry_point(self, tmp_path):
        write_edgelist(StaticGraph.path(3), tmp_path / "p3.edges")
        res = subprocess.run([sys.executable, "-m", "dmed", "graph", "info", str(tmp_path / "p3.edges")],
                             capture_output=True, text=True)
        assert res.returncode == 0 and "lambda2=1" in res.stdout
