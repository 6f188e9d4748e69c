import os
import textwrap

import pytest

from innosim.errors import ManifestError, NonConvergence
from innosim.experiments import run_manifest, sweep_points
from innosim.manifest import Manifest


def make(text: str) -> Manifest:
    return Manifest.parse("manifest_version = 1\n" + textwrap.dedent(text))


SIM_TINY = """\
experiment = simulate
id = sim_tiny
seed = 5
reps = 30
world.k = 3
world.delta = 1.0
profile.p = 0.6
profile.q = 0.1
sweep.n = 40 30
"""


def test_simulate_sweep_sorted_and_deterministic(tmp_path):
    m = make(SIM_TINY)
    paths = run_manifest(m, str(tmp_path / "a"))
    assert paths == [str(tmp_path / "a" / "sim_tiny.csv")]
    data = open(paths[0], "rb").read()
    assert b"\r" not in data
    lines = data.decode("utf-8").splitlines()
    assert lines[0] == "n,p,q,lambda,reps,net_mean,net_se,pt_mean,gross_mean"
    assert len(lines) == 3
    assert lines[1].startswith("30,")
    assert lines[2].startswith("40,")
    again = run_manifest(m, str(tmp_path / "b"))
    assert open(again[0], "rb").read() == data
    reseeded = run_manifest(m, str(tmp_path / "c"), overrides={"seed": 99})
    assert open(reseeded[0], "rb").read() != data


def test_sweep_points_cartesian_dedup():
    m = make("experiment = simulate\nseed = 1\n"
             "sweep.n = 40 40 30\nsweep.delta = 1.0 0.5\n")
    axes, points = sweep_points(m)
    assert axes == ["n", "delta"]
    assert points == [{"n": 30, "delta": 0.5}, {"n": 30, "delta": 1.0},
                      {"n": 40, "delta": 0.5}, {"n": 40, "delta": 1.0}]


def test_best_response_row(tmp_path):
    m = make("""\
    experiment = best-response
    seed = 3
    reps = 40
    solver.grid_points = 7
    world.n = 40
    world.k = 3
    world.delta = 1.0
    profile.p = 0.7
    profile.q = 0.12
    """)
    (path,) = run_manifest(m, str(tmp_path))
    assert path.endswith("best-response.csv")
    lines = open(path, encoding="utf-8").read().splitlines()
    assert lines[0] == "p,q_opp,q_br,payoff,payoff_se,indifferent"
    cells = lines[1].split(",")
    assert cells[0] == "0.7"
    assert 0.0 < float(cells[2]) <= 1.0
    assert cells[5] == "false"


def test_equilibrium_nonconvergence_writes_trace(tmp_path):
    m = make("""\
    experiment = equilibrium
    id = eqfail
    seed = 2
    reps = 30
    cost.c0 = 0.1
    solver.max_iters = 1
    solver.q_tol = 1e-06
    solver.p_tol = 1e-06
    solver.polish_factor = 1
    solver.polish_iters = 1
    world.n = 60
    world.k = 3
    world.delta = 1.0
    """)
    with pytest.raises(NonConvergence, match="eqfail.trace.txt"):
        run_manifest(m, str(tmp_path))
    trace = tmp_path / "eqfail.trace.txt"
    assert trace.exists()
    body = trace.read_text(encoding="utf-8")
    assert "variant=" in body
    # the data rows written before the failure stay on disk
    assert (tmp_path / "eqfail.csv").exists()


def test_intervention_given_profile(tmp_path):
    m = make("""\
    experiment = intervention
    id = iv
    seed = 4
    reps = 40
    cost.c0 = 0.1
    world.n = 50
    world.k = 3
    world.delta = 1.0
    profile.p = 0.6
    profile.q = 0.12
    sweep.factors = 1.25 0.8
    """)
    (path,) = run_manifest(m, str(tmp_path))
    lines = open(path, encoding="utf-8").read().splitlines()
    assert lines[0] == ("factor,p,q,payoff,payoff_se,ratio,p_derivative,"
                       "derivative_ratio")
    # the unit factor joins the scan even when not requested
    factors = [row.split(",")[0] for row in lines[1:]]
    assert factors == ["0.8", "1", "1.25"]
    unit = lines[2].split(",")
    assert unit[5] == "1"
    assert unit[7] == "1"


def test_replay_experiment(tmp_path, fig1_text):
    replay = tmp_path / "fig1.replay"
    replay.write_text(fig1_text, encoding="utf-8")
    m = make(f"""\
    experiment = replay
    id = rp
    seed = 1
    world.k = 3
    replay.file = {replay}
    """)
    (path,) = run_manifest(m, str(tmp_path))
    lines = open(path, encoding="utf-8").read().splitlines()
    assert lines[0].startswith("firm,")
    assert lines[3] == "2,1,0,0,1,0,0,1"


def test_manifest_error_paths(tmp_path):
    out = str(tmp_path)
    with pytest.raises(ManifestError, match="unknown kind"):
        run_manifest(make("experiment = warp\nseed = 1\n"), out)
    with pytest.raises(ManifestError, match="seed"):
        run_manifest(make(SIM_TINY.replace("seed = 5\n", "")), out)
    with pytest.raises(ManifestError, match="unknown sweep axis"):
        run_manifest(make(SIM_TINY + "sweep.m = 1 2\n"), out)
    with pytest.raises(ManifestError, match="world.n"):
        run_manifest(make(SIM_TINY.replace("sweep.n = 40 30\n", "")), out)
    with pytest.raises(ManifestError, match="profile.p"):
        run_manifest(make(SIM_TINY.replace("profile.p = 0.6\n", "")), out)
    with pytest.raises(ManifestError, match="replay.file"):
        run_manifest(make("experiment = replay\nseed = 1\nworld.k = 3\n"), out)
    with pytest.raises(ManifestError, match="world.k"):
        run_manifest(make("experiment = replay\nseed = 1\n"
                          "replay.file = missing.replay\n"), out)
    with pytest.raises(ManifestError, match="sweep.c"):
        run_manifest(make("experiment = phase-scan\nseed = 1\nworld.n = 30\n"
                          "world.k = 3\nworld.delta = 1.0\nsweep.n = 30\n"), out)
    with pytest.raises(ManifestError, match="budget.rate"):
        run_manifest(make("experiment = budget\nseed = 1\nreps = 10\n"
                          "world.n = 30\nworld.k = 3\nworld.delta = 1.0\n"), out)


def test_seed_override_satisfies_requirement(tmp_path):
    m = make(SIM_TINY.replace("seed = 5\n", "").replace("sweep.n = 40 30\n",
                                                        "sweep.n = 30\n"))
    (path,) = run_manifest(m, str(tmp_path), overrides={"seed": 11})
    assert os.path.exists(path)
