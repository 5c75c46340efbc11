"""Asynchronous decentralized variant: per-agent weight replicas mixed by
doubly stochastic gossip over a communication graph, with one uniformly
activated agent per step performing its own kinematics and a single-sample
plasticity update.

The simulator is logically sequential (one activation per step) so a seed
fully determines the event order; agent noise comes from per-agent streams
derived by seed XOR agent index.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dynamics import DynamicsConfig, lyapunov_value, plasticity_step
from .errors import DimensionError, TopologyError
from .geometry import Manifold
from .numerics import SELECTION_STREAM_TAG, SeededRng, sym_eig

MIXING_ATOL = 1e-12


@dataclass
class GossipTopology:
    kind: str
    edges: list  # list of (i, j) with i < j
    mixing: np.ndarray  # N x N doubly stochastic
    n_agents: int

    @property
    def max_degree(self) -> int:
        deg = np.zeros(self.n_agents, dtype=int)
        for i, j in self.edges:
            deg[i] += 1
            deg[j] += 1
        return int(deg.max())

    def neighbors(self, i: int) -> np.ndarray:
        out = [j for a, j in self.edges if a == i] + [a for a, j in self.edges if j == i]
        return np.array(sorted(out), dtype=int)


def _metropolis(edges: list, n: int) -> np.ndarray:
    deg = np.zeros(n, dtype=int)
    for i, j in edges:
        deg[i] += 1
        deg[j] += 1
    P = np.zeros((n, n))
    for i, j in edges:
        w = 1.0 / (1.0 + max(deg[i], deg[j]))
        P[i, j] = w
        P[j, i] = w
    for i in range(n):
        P[i, i] = 1.0 - P[i].sum()
    return P


def _connected(edges: list, n: int) -> bool:
    adj = [[] for _ in range(n)]
    for i, j in edges:
        adj[i].append(j)
        adj[j].append(i)
    seen = [False] * n
    stack = [0]
    seen[0] = True
    while stack:
        for j in adj[stack.pop()]:
            if not seen[j]:
                seen[j] = True
                stack.append(j)
    return all(seen)


def build_mixing(edges: list, n_agents: int, kind: str = "custom") -> GossipTopology:
    """Metropolis-weighted doubly stochastic mixing matrix over the given
    connected communication graph."""
    edges = [(min(i, j), max(i, j)) for i, j in edges]
    edges = sorted(set(edges))
    if any(i == j or i < 0 or j >= n_agents for i, j in edges):
        raise DimensionError("edges must connect distinct agents in range")
    if not _connected(edges, n_agents):
        raise TopologyError("communication graph is disconnected")
    P = _metropolis(edges, n_agents)
    assert abs(P.sum(axis=0) - 1.0).max() < MIXING_ATOL and abs(P.sum(axis=1) - 1.0).max() < MIXING_ATOL
    return GossipTopology(kind, edges, P, n_agents)


def ring_topology(n_agents: int) -> GossipTopology:
    edges = [(i, (i + 1) % n_agents) for i in range(n_agents)]
    return build_mixing(edges, n_agents, kind="ring")


def complete_topology(n_agents: int) -> GossipTopology:
    edges = [(i, j) for i in range(n_agents) for j in range(i + 1, n_agents)]
    return build_mixing(edges, n_agents, kind="complete")


def random_regular_topology(n_agents: int, degree: int, seed: int = 0) -> GossipTopology:
    """k-regular graph by the pairing model, retried until simple and
    connected."""
    if n_agents * degree % 2 or degree >= n_agents:
        raise DimensionError("need n*k even and k < n")
    rng = SeededRng(seed)
    for _ in range(1000):
        stubs = np.repeat(np.arange(n_agents), degree)
        order = np.argsort(rng.uniform(stubs.size), kind="stable")
        stubs = stubs[order]
        pairs = [(int(stubs[2 * t]), int(stubs[2 * t + 1])) for t in range(stubs.size // 2)]
        if any(i == j for i, j in pairs):
            continue
        norm = {(min(i, j), max(i, j)) for i, j in pairs}
        if len(norm) != len(pairs):
            continue
        if _connected(sorted(norm), n_agents):
            return build_mixing(sorted(norm), n_agents, kind=f"random_regular_{degree}")
    raise TopologyError(f"could not realize a connected {degree}-regular graph on {n_agents} nodes")


def second_singular_value(topo: GossipTopology) -> float:
    """Consensus contraction factor: second-largest singular value of the
    mixing matrix, via the eigenvalues of P^T P."""
    P = topo.mixing
    sig2 = sym_eig(P.T @ P).eigenvalues
    sig = np.sqrt(np.clip(sig2, 0.0, None))
    return float(sig[1])


@dataclass
class ReplicaSet:
    weights: np.ndarray  # (N, m, n) per-agent replicas
    positions: np.ndarray  # (N, n)
    manifold: Manifold

    @property
    def n_agents(self) -> int:
        return self.weights.shape[0]

    def mean_weights(self) -> np.ndarray:
        return self.weights.mean(axis=0)


def disagreement(replicas: ReplicaSet | np.ndarray) -> float:
    """Max pairwise Frobenius distance between replicas."""
    W = replicas.weights if isinstance(replicas, ReplicaSet) else replicas
    n = W.shape[0]
    if n < 2:
        raise DimensionError("need at least two replicas")
    flat = W.reshape(n, -1)
    worst = 0.0
    for i in range(n):
        d = np.linalg.norm(flat[i + 1 :] - flat[i], axis=1)
        if d.size:
            worst = max(worst, float(d.max()))
    return worst


def mix_rounds(weights: np.ndarray, topo: GossipTopology, rounds: int) -> np.ndarray:
    """Pure consensus: apply the full mixing matrix to the replica stack a
    number of times (plasticity and kinematics off)."""
    n = weights.shape[0]
    flat = weights.reshape(n, -1).copy()
    for _ in range(rounds):
        flat = topo.mixing @ flat
    return flat.reshape(weights.shape)


def async_step(
    replicas: ReplicaSet,
    topo: GossipTopology,
    cfg: DynamicsConfig,
    selection_rng: SeededRng,
    agent_rngs: list,
) -> tuple[ReplicaSet, int]:
    """One activation: a uniformly chosen agent moves, does a single-sample
    plasticity update, then its closed neighborhood re-mixes using the
    global mixing rows over current values (only the activated agent has a
    fresh proposal). Returns the updated replicas and the activated index."""
    i = int(selection_rng.integers(replicas.n_agents)[0])
    W = replicas.weights
    x = replicas.positions

    xi = x[i : i + 1]
    Wi = W[i]
    if cfg.eta_x > 0.0 and cfg.diffusion > 0.0:
        drift = cfg.eta_x * cfg.diffusion * cfg.beta * (xi @ (Wi.T @ Wi))
        noise = np.sqrt(2.0 * cfg.diffusion * cfg.eta_x) * agent_rngs[i].normal(xi.size).reshape(xi.shape)
        moved = xi + drift + noise
        if not replicas.manifold.free:
            moved = replicas.manifold.project(moved)
            if not np.isfinite(moved).all():
                moved = xi
        x = x.copy()
        x[i] = moved[0]

    proposal = plasticity_step(Wi, x[i : i + 1], cfg)

    current = W.copy()
    current[i] = proposal
    touched = np.append(topo.neighbors(i), i)
    W_new = W.copy()
    flat = current.reshape(replicas.n_agents, -1)
    for j in touched:
        W_new[j] = (topo.mixing[j] @ flat).reshape(Wi.shape)
    return ReplicaSet(W_new, x, replicas.manifold), i


@dataclass
class AsyncTrace:
    replicas: ReplicaSet
    mean_lyapunov: np.ndarray  # V(mean replica) once per sweep (N activations)
    disagreements: np.ndarray  # sampled with mean_lyapunov
    status: str
    halted_at: int | None = None


def run_async(
    manifold: Manifold,
    topo: GossipTopology,
    cfg: DynamicsConfig,
    seed: int,
    steps: int,
    initial_positions: np.ndarray | None = None,
    initial_weights: np.ndarray | None = None,
    sample_every: int | None = None,
) -> AsyncTrace:
    """Run ``steps`` asynchronous activations; samples V(mean replica) and
    the disagreement every ``sample_every`` activations (default: one sweep
    of N activations). Divergence of any replica halts with a phase label."""
    from .dynamics import STATUS_DIVERGED, STATUS_OK, WEIGHT_NORM_GUARD
    from .geometry import sample_uniform

    root = SeededRng(seed)
    selection = root.derive(SELECTION_STREAM_TAG)
    n = topo.n_agents
    agent_rngs = [root.derive(i) for i in range(n)]

    if initial_positions is None:
        initial_positions = sample_uniform(manifold, n, root).positions
    if initial_weights is None:
        raise DimensionError("run_async needs initial weights")
    W = np.broadcast_to(initial_weights, (n,) + initial_weights.shape).copy()
    replicas = ReplicaSet(W, np.array(initial_positions, copy=True), manifold)

    every = sample_every or n
    vbar = [lyapunov_value(replicas.mean_weights())]
    dis = [disagreement(replicas)]
    status, halted = STATUS_OK, None
    for k in range(steps):
        replicas, i = async_step(replicas, topo, cfg, selection, agent_rngs)
        if (k + 1) % every == 0:
            vbar.append(lyapunov_value(replicas.mean_weights()))
            dis.append(disagreement(replicas))
        frob2 = float((replicas.weights[i] * replicas.weights[i]).sum())
        if not np.isfinite(frob2) or frob2 > WEIGHT_NORM_GUARD**2:
            status, halted = STATUS_DIVERGED, k + 1
            break
    return AsyncTrace(replicas, np.array(vbar), np.array(dis), status, halted)
