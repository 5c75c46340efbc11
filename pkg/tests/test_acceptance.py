"""Acceptance suite: every criterion runs at desk scale and prints one
PASS/FAIL line. Heavy simulations are shared through module-scoped
fixtures; configs live in configs/ and are the same files the CLI uses.

Run with `pytest tests/test_acceptance.py -v -s`.
"""

import os
from dataclasses import replace

import numpy as np
import pytest

from hebbflow.config import load_config
from hebbflow.dynamics import (
    DynamicsConfig,
    init_weights,
    integrate_averaged,
    closed_form_ratio,
    lyapunov_value,
    run_coupled,
    static_swarm_config,
    frozen_weights_config,
)
from hebbflow.geometry import make_manifold, sample_uniform
from hebbflow.gossip import complete_topology, disagreement, mix_rounds, ring_topology, run_async, second_singular_value
from hebbflow.harness import PHASE_DIVERGED, PHASE_STABLE, initial_swarm, run_generator_test, run_single_seed
from hebbflow.metrics import grad_W, grad_X, joint_energy, linear_probe
from hebbflow.numerics import SeededRng, power_stationary
from hebbflow.substrate import build_chain, build_graph, detailed_balance_residual, mean_neighbor_generator_error
from hebbflow.substrate import circle_cos_field, zero_field

CONFIG_DIR = os.path.join(os.path.dirname(__file__), os.pardir, "configs")


def cfg_path(name):
    return os.path.join(CONFIG_DIR, name)


def report(name, ok, detail):
    print(f"\nACCEPTANCE {name}: {'PASS' if ok else 'FAIL'} — {detail}")
    assert ok, f"{name}: {detail}"


@pytest.fixture(scope="module")
def default_runs():
    config = load_config(cfg_path("default.ini"))
    return [run_single_seed(config, seed) for seed in config.seeds]


@pytest.fixture(scope="module")
def sweep_runs():
    config = load_config(cfg_path("sweep.ini"))
    out = {}
    for ratio in config.sweep_ratios:
        dyn = replace(config.dynamics, eta_w=ratio * config.dynamics.eta_x)
        out[ratio] = [run_single_seed(config, seed, dyn=dyn) for seed in config.seeds]
    return out


@pytest.fixture(scope="module")
def ablation_runs():
    config = load_config(cfg_path("ablation.ini"))
    regimes = {
        "coupled": config.dynamics,
        "ode_only": static_swarm_config(config.dynamics),
        "sde_only": frozen_weights_config(config.dynamics),
    }
    return config, {
        name: [run_single_seed(config, seed, dyn=dyn) for seed in config.seeds]
        for name, dyn in regimes.items()
    }


def test_capacity_anchoring(default_runs):
    finals = [summary.final.frob_W for _, _, summary in default_runs]
    ok = all(0.9999 <= f <= 1.0001 for f in finals)
    report("capacity anchoring", ok, f"final ||W||_F per seed: {[f'{f:.6f}' for f in finals]}")


def test_lyapunov_dissipativity(default_runs, sweep_runs):
    tails_swiss = [summary.tail_max_dv for _, _, summary in default_runs]
    ok_a = max(tails_swiss) <= 1e-6
    whole_run = max(rec.dV for records, _, _ in default_runs for rec in records)
    ok_whole = whole_run <= 1e-6
    tails_sync = [summary.tail_max_dv for _, _, summary in sweep_runs[0.001]]
    ok_b = max(tails_sync) <= 1e-10
    report(
        "lyapunov dissipativity",
        ok_a and ok_whole and ok_b,
        f"swiss-roll ratio 0.1 tail max dV = {max(tails_swiss):.2e}, whole-run max {whole_run:.2e} (<=1e-6); "
        f"spectrum ratio 0.001 tail max dV = {max(tails_sync):.2e} (<=0 within 1e-10)",
    )


def test_timescale_phase_transition(sweep_runs):
    fast = [s.phase for _, _, s in sweep_runs[1.5]]
    slow = [s.phase for _, _, s in sweep_runs[0.001]]
    ok = all(p == PHASE_DIVERGED for p in fast) and all(p == PHASE_STABLE for p in slow)
    report("timescale phase transition", ok, f"ratio 1.5 -> {set(fast)}, ratio 0.001 -> {set(slow)}")


def test_eigenspace_alignment():
    config = load_config(cfg_path("alignment.ini"))
    sins, projs = [], []
    for seed in config.seeds:
        _, trace, _ = run_single_seed(config, seed)
        # final-record metrics are measured against the empirical basis
        from hebbflow.harness import make_reference
        from hebbflow.metrics import noise_projection, subspace_angle

        ref = make_reference(trace.swarm.positions, config.latent_dim)
        sins.append(subspace_angle(trace.weights, ref))
        projs.append(noise_projection(trace.weights, ref))
    ok = max(sins) <= 1e-3 and max(projs) <= 1e-3
    report(
        "eigenspace alignment",
        ok,
        f"max sin_theta = {max(sins):.2e}, max noise_proj = {max(projs):.2e} (both <= 1e-3)",
    )


def test_orthogonal_disentanglement(ablation_runs):
    config, runs = ablation_runs
    ortho = {name: [summary.final.ortho_error for _, _, summary in rs] for name, rs in runs.items()}
    rk = [summary.final.eff_rank for _, _, summary in runs["coupled"]]
    per_seed_ok = max(ortho["coupled"]) <= 0.1
    order_ok = np.mean(ortho["coupled"]) < min(np.mean(ortho["ode_only"]), np.mean(ortho["sde_only"]))
    rank_ok = np.mean(rk) >= 1.9
    report(
        "orthogonal disentanglement",
        per_seed_ok and order_ok and rank_ok,
        f"coupled ortho max {max(ortho['coupled']):.3f} (<=0.1), means: coupled "
        f"{np.mean(ortho['coupled']):.3f} < ode {np.mean(ortho['ode_only']):.3f} / sde "
        f"{np.mean(ortho['sde_only']):.3f}; coupled rk_eff mean {np.mean(rk):.3f} (>=1.9)",
    )


def test_frozen_regime_leaves_weights(ablation_runs):
    config, runs = ablation_runs
    seed = config.seeds[0]
    manifold = config.build_manifold()
    rng = SeededRng(seed)
    initial_swarm(manifold, config, rng)  # consume the same stream as the harness
    W0 = init_weights(config.latent_dim, manifold.ambient_dim, rng, config.weight_scale)
    _, trace, _ = runs["sde_only"][0]
    assert np.array_equal(trace.weights, W0), "frozen-W regime must return the exact initialization"


def test_closed_form_decay_oracle():
    sigma = np.diag([3.0, 2.0, 1.0])
    W0 = np.array([[0.35, 0.25, 0.45]])
    worst = 0.0
    for tau in (0.5, 1.0, 2.0):
        W = integrate_averaged(W0, sigma, gamma=1.0, tau_end=tau)
        got = W[0, 2] / W[0, 0]
        want = closed_form_ratio(W0[0, 2], W0[0, 0], 3.0, 1.0, 1.0, tau)
        worst = max(worst, abs(got - want) / abs(want))
    report("closed-form decay oracle", worst <= 1e-6, f"worst relative error {worst:.2e} at tau in {{0.5,1,2}}")


def test_generator_convergence(tmp_path):
    config = load_config(cfg_path("generator.ini"))
    with pytest.warns(UserWarning):  # final violated entry breaks the diagnostic trend
        rows = run_generator_test(config, str(tmp_path))
    med = [r["median_error"] for r in rows]
    decreasing = med[0] > med[1] > med[2]
    violated = med[3] > med[2]
    report(
        "generator convergence",
        decreasing and violated,
        f"medians along schedule {[f'{m:.3f}' for m in med[:3]]} strictly decreasing; "
        f"violated-scaling entry {med[3]:.3f} exceeds compliant {med[2]:.3f}",
    )


def test_detailed_balance_and_stationarity():
    worst_res, worst_pi = 0.0, 0.0
    rng_master = np.random.default_rng(0)
    for case in range(20):
        kind = "circle" if case % 2 == 0 else "sphere"
        m = make_manifold(kind)
        n = int(rng_master.integers(40, 70))
        sw = sample_uniform(m, n, SeededRng(1000 + case))
        eps = 0.8 if kind == "circle" else 1.0
        g = build_graph(sw, eps)
        coeffs = rng_master.standard_normal(m.ambient_dim)
        u = np.tanh(sw.positions @ coeffs)  # smooth bounded potential
        chain = build_chain(g, u, beta=float(rng_master.uniform(0.3, 2.0)), diffusion=0.5, intrinsic_dim=m.intrinsic_dim)
        worst_res = max(worst_res, detailed_balance_residual(chain))
        pi = power_stationary(chain.dense_matrix(), tol=1e-14)
        worst_pi = max(worst_pi, float(np.abs(pi - chain.stationary_closed_form()).max()))
    ok = worst_res <= 1e-12 and worst_pi <= 1e-10
    report(
        "detailed balance and stationarity",
        ok,
        f"20 RGG chains: max balance residual {worst_res:.2e} (<=1e-12), max |pi - closed form| {worst_pi:.2e} (<=1e-10)",
    )


def test_gradient_correctness():
    rng = np.random.default_rng(1)
    h, worst = 1e-5, 0.0
    for _ in range(100):
        X = rng.standard_normal((4, 3))
        W = rng.standard_normal((2, 3))
        lam = float(rng.uniform(0.2, 2.0))
        gx, gw = grad_X(X, W), grad_W(X, W, lam)
        for idx in [(0, 0), (1, 2), (3, 1)]:
            Xp, Xm = X.copy(), X.copy()
            Xp[idx] += h
            Xm[idx] -= h
            worst = max(worst, abs(gx[idx] - (joint_energy(Xp, W, lam) - joint_energy(Xm, W, lam)) / (2 * h)))
        for idx in [(0, 0), (1, 1)]:
            Wp, Wm = W.copy(), W.copy()
            Wp[idx] += h
            Wm[idx] -= h
            worst = max(worst, abs(gw[idx] - (joint_energy(X, Wp, lam) - joint_energy(X, Wm, lam)) / (2 * h)))
    # exact-gradient Euler descent stays monotone
    X = rng.standard_normal((20, 3))
    W = 0.5 * rng.standard_normal((2, 3))
    monotone = True
    e_prev = joint_energy(X, W, 1.0)
    for _ in range(100):
        X = X - 1e-3 * grad_X(X, W)
        W = W - 1e-3 * grad_W(X, W, 1.0)
        e = joint_energy(X, W, 1.0)
        monotone &= e <= e_prev + 1e-12
        e_prev = e
    ok = worst <= 1e-6 and monotone
    report("gradient correctness", ok, f"max |grad - FD| = {worst:.2e} (<=1e-6); Euler descent monotone: {monotone}")


def test_gossip_consensus():
    # contraction at the mixing matrix's own rate (zero-mean replicas:
    # disagreement dynamics are translation invariant)
    topo = ring_topology(8)
    rho = second_singular_value(topo)
    rng = np.random.default_rng(2)
    W = rng.standard_normal((8, 2, 3))
    W -= W.mean(axis=0)
    d0 = disagreement(W)
    d_final = disagreement(mix_rounds(W, topo, 200))
    contraction_ok = d_final <= d0 * rho**200

    # full asynchronous run tracks the synchronous trajectory in V(W_bar)
    m = make_manifold("swiss_roll")
    n_agents, steps = 8, 2000
    dyn = DynamicsConfig(eta_x=1e-4, eta_w=1e-4, diffusion=0.5, beta=1.0, steps=steps)
    complete = complete_topology(n_agents)
    worst_gap, v0_scale = 0.0, 0.0
    for seed in range(3):
        rng_s = SeededRng(seed)
        sw = sample_uniform(m, n_agents, rng_s)
        W0 = init_weights(2, 3, rng_s, 0.1)
        v0 = lyapunov_value(W0)
        sync = run_coupled(sw, W0.copy(), dyn, SeededRng(seed + 1000))
        tr = run_async(m, complete, dyn, seed, n_agents * steps, initial_positions=sw.positions, initial_weights=W0)
        worst_gap = max(worst_gap, abs(tr.mean_lyapunov[-1] - lyapunov_value(sync.weights)))
        v0_scale = max(v0_scale, v0)
    tracking_ok = worst_gap <= 0.1 * v0_scale
    report(
        "gossip consensus",
        contraction_ok and tracking_ok,
        f"ring-8 disagreement {d_final:.2e} <= d0*rho^200 = {d0 * rho**200:.2e}; "
        f"async-vs-sync |dV(W_bar)| = {worst_gap:.2e} <= 0.1*V0 = {0.1 * v0_scale:.2e}",
    )


def test_linear_separability_improvement():
    config = load_config(cfg_path("probe.ini"))
    manifold = config.build_manifold()
    total_arc = manifold.arc_length_from(np.array([manifold.t_max]))[0]
    ambs, lats = [], []
    for seed in config.seeds:
        rng = SeededRng(seed)
        sw = initial_swarm(manifold, config, rng)
        labels = np.minimum(
            (manifold.arc_length_from(manifold.chart_t(sw.positions)) / total_arc * 3).astype(int), 2
        )
        W0 = init_weights(config.latent_dim, manifold.ambient_dim, rng, config.weight_scale)
        trace = run_coupled(sw, W0, config.dynamics, rng)
        ambs.append(linear_probe(sw.positions, labels, folds=5, seed=seed))
        lats.append(linear_probe(trace.swarm.positions @ trace.weights.T, labels, folds=5, seed=seed))
    gain = float(np.mean(lats) - np.mean(ambs))
    report(
        "linear separability improvement",
        gain >= 0.10,
        f"latent {np.mean(lats):.3f} vs ambient {np.mean(ambs):.3f}: gain {100 * gain:.1f} points (>=10)",
    )
