"""Policy-gradient trainers for the afterstate actor: REINFORCE, trajectory
PPO, and buffer PPO.

Rollouts run in the compiled kernels; the update math lives here in numpy
so gradients can be checked against finite differences. The critic reads
the nine feature values of boards: the pre-decision board's features are
the previous step's chosen afterstate features (the empty-board vector at
an episode start).
"""
from __future__ import annotations

import time
from dataclasses import dataclass, replace

import numpy as np

from . import _kernels as K
from .engine import GENERATOR_KINDS
from .features import MAX_ACTIONS, N_FEATURES
from .policy import LinearCritic, LinearPolicy, temperature

REINFORCE = "reinforce"
TRAJECTORY_PPO = "ppo-traj"
BUFFER_PPO = "ppo-buffer"


@dataclass
class Hyperparams:
    algo: str
    gamma: float = 0.99
    lam: float = 0.99
    clip_eps: float = 0.2
    lr_actor: float = 3e-4
    lr_critic: float = 3e-4
    epochs: int = 10
    batch_size: int = 2048
    mini_batch: int = 256
    total_steps: int = 61440
    episodes: int = 12500
    tau0: float = 0.5
    tau_k: float = 0.00025
    fixed_tau: float = 1.0         # buffer PPO samples untempered
    anneal_tau: bool = False       # optional annealing for the buffer variant
    anneal_index: str = "episode"  # what drives that anneal: episode | step
    adv_norm: bool = True
    board_height: int = 10
    gen_kind: str = "random"
    probe_episodes: int = 50
    max_episode_steps: int = 200_000

    @staticmethod
    def reinforce(**overrides) -> "Hyperparams":
        hp = Hyperparams(algo=REINFORCE, gamma=1.0, lr_actor=1e-3, episodes=12500)
        return replace(hp, **overrides)

    @staticmethod
    def trajectory_ppo(**overrides) -> "Hyperparams":
        hp = Hyperparams(algo=TRAJECTORY_PPO, gamma=0.99, lam=0.99, epochs=10,
                         clip_eps=0.1, lr_actor=3e-4, lr_critic=3e-4,
                         tau0=0.5, tau_k=0.00025, episodes=12500)
        return replace(hp, **overrides)

    @staticmethod
    def buffer_ppo(**overrides) -> "Hyperparams":
        hp = Hyperparams(algo=BUFFER_PPO, gamma=0.99, lam=0.99, epochs=10,
                         clip_eps=0.2, lr_actor=3e-4, lr_critic=3e-4,
                         batch_size=2048, mini_batch=256, total_steps=61440)
        return replace(hp, **overrides)


def returns_to_go(rewards, gamma: float) -> np.ndarray:
    """Discounted suffix sums by backward recursion."""
    rewards = np.asarray(rewards, dtype=np.float64)
    out = np.empty_like(rewards)
    acc = 0.0
    for t in range(len(rewards) - 1, -1, -1):
        acc = rewards[t] + gamma * acc
        out[t] = acc
    return out


def td_deltas(rewards, v_pre, v_chosen, dones, gamma: float) -> np.ndarray:
    """One-step TD errors; the bootstrap term is zero on terminal steps."""
    rewards = np.asarray(rewards, dtype=np.float64)
    cont = 1.0 - np.asarray(dones, dtype=np.float64)
    return rewards + gamma * np.asarray(v_chosen) * cont - np.asarray(v_pre)


def gae(deltas, gamma: float, lam: float, dones) -> np.ndarray:
    """Exponentially weighted advantage recursion, cut at episode ends.

    The final stored transition of a truncated (non-terminal) batch keeps
    just its own delta: there is no continuation term past the buffer.
    """
    deltas = np.asarray(deltas, dtype=np.float64)
    cont = 1.0 - np.asarray(dones, dtype=np.float64)
    out = np.empty_like(deltas)
    acc = 0.0
    decay = gamma * lam
    for t in range(len(deltas) - 1, -1, -1):
        acc = deltas[t] + decay * cont[t] * acc
        out[t] = acc
    return out


def linear_lr(alpha_init: float, current_step: int, total_steps: int) -> float:
    """Linearly decayed learning rate; exactly zero at current == total."""
    return alpha_init * (1.0 - current_step / total_steps)


def _masked_log_probs(theta, feats, mask, tau):
    """Log-probabilities and probabilities of the masked softmax actor.

    feats: (T, 34, 9); mask: (T, 34); returns (logits_minus_lse, probs).
    """
    logits = (feats @ theta) / tau
    logits = np.where(mask != 0, logits, -np.inf)
    m = logits.max(axis=1, keepdims=True)
    lse = m + np.log(np.exp(logits - m).sum(axis=1, keepdims=True))
    logp_all = logits - lse
    probs = np.exp(logp_all)
    return logp_all, probs


def log_policy(theta, feats, mask, actions, tau: float) -> np.ndarray:
    """log pi(a_t) for each sample of a minibatch."""
    logp_all, _ = _masked_log_probs(np.asarray(theta, dtype=np.float64), feats, mask, tau)
    return logp_all[np.arange(len(actions)), actions]


def log_policy_grad(theta, feats, mask, actions, tau: float) -> np.ndarray:
    """d log pi(a_t) / d theta, one 9-vector per sample: (f_a - E_pi f) / tau."""
    _, probs = _masked_log_probs(np.asarray(theta, dtype=np.float64), feats, mask, tau)
    idx = np.arange(len(actions))
    expected = np.einsum("tb,tbf->tf", probs, feats)
    return (feats[idx, actions] - expected) / tau


def reinforce_update(policy: LinearPolicy, feats, mask, actions, returns,
                     alpha: float, tau: float) -> LinearPolicy:
    """One gradient-ascent step on sum_t G_t log pi(a_t)."""
    grads = log_policy_grad(policy.weights, feats, mask, actions, tau)
    step = (np.asarray(returns, dtype=np.float64)[:, None] * grads).sum(axis=0)
    return LinearPolicy(policy.weights + alpha * step)


def clipped_surrogate(theta, feats, mask, actions, logp_old, adv, tau, eps) -> float:
    """The PPO objective mean(min(r A, clip(r) A)) as a plain function of theta."""
    logp = log_policy(theta, feats, mask, actions, tau)
    ratio = np.exp(logp - np.asarray(logp_old, dtype=np.float64))
    adv = np.asarray(adv, dtype=np.float64)
    return float(np.minimum(ratio * adv, np.clip(ratio, 1 - eps, 1 + eps) * adv).mean())


def clipped_surrogate_grad(theta, feats, mask, actions, logp_old, adv, tau, eps) -> np.ndarray:
    """Analytic gradient of clipped_surrogate; clipped-out samples contribute zero."""
    logp = log_policy(theta, feats, mask, actions, tau)
    ratio = np.exp(logp - np.asarray(logp_old, dtype=np.float64))
    adv = np.asarray(adv, dtype=np.float64)
    unclipped = ratio * adv
    clipped = np.clip(ratio, 1 - eps, 1 + eps) * adv
    coef = np.where(unclipped <= clipped, ratio * adv, 0.0)
    grads = log_policy_grad(theta, feats, mask, actions, tau)
    return (coef[:, None] * grads).mean(axis=0)


class Adam:
    """Adam ascent steps; the learning rate is supplied per call so linear
    decay composes naturally."""

    def __init__(self, size: int, beta1: float = 0.9, beta2: float = 0.999,
                 eps: float = 1e-8):
        self.m = np.zeros(size)
        self.v = np.zeros(size)
        self.t = 0
        self.beta1, self.beta2, self.eps = beta1, beta2, eps

    def step(self, grad: np.ndarray, lr: float) -> np.ndarray:
        """Returns the parameter increment for an ascent step along grad."""
        self.t += 1
        self.m = self.beta1 * self.m + (1 - self.beta1) * grad
        self.v = self.beta2 * self.v + (1 - self.beta2) * grad * grad
        m_hat = self.m / (1 - self.beta1 ** self.t)
        v_hat = self.v / (1 - self.beta2 ** self.t)
        return lr * m_hat / (np.sqrt(v_hat) + self.eps)


def ppo_update(policy: LinearPolicy, critic: LinearCritic, feats, mask, actions,
               logp_old, adv, targets, pre_feats, *, eps: float, lr_actor: float,
               lr_critic: float, tau: float, adv_norm: bool = True,
               actor_opt: Adam | None = None, critic_opt: Adam | None = None
               ) -> tuple[LinearPolicy, LinearCritic]:
    """One ascent step on the clipped surrogate and one critic regression step.

    Without optimizers this is a plain gradient step; the trainers pass Adam
    states, which consume the same analytic gradients.
    """
    adv = np.asarray(adv, dtype=np.float64)
    if adv_norm:
        adv = (adv - adv.mean()) / (adv.std() + 1e-8)
    g = clipped_surrogate_grad(policy.weights, feats, mask, actions, logp_old, adv, tau, eps)
    delta = actor_opt.step(g, lr_actor) if actor_opt is not None else lr_actor * g
    new_policy = LinearPolicy(policy.weights + delta)

    pre_feats = np.asarray(pre_feats, dtype=np.float64)
    err = np.asarray(targets, dtype=np.float64) - critic.values(pre_feats)
    cg = np.empty(N_FEATURES + 1)
    cg[:N_FEATURES] = (err[:, None] * pre_feats).mean(axis=0)
    cg[N_FEATURES] = err.mean()
    cd = critic_opt.step(cg, lr_critic) if critic_opt is not None else lr_critic * cg
    new_critic = LinearCritic(critic.weights + cd[:N_FEATURES],
                              critic.bias + cd[N_FEATURES])
    return new_policy, new_critic


class EnvRunner:
    """A persistent sampled-rollout environment driven by the collect kernel."""

    def __init__(self, height: int, gen_kind: str, seed: int):
        self.height = height
        self.state = np.zeros(15, dtype=np.int64)
        self.gen = np.zeros(10, dtype=np.uint64)
        self.gen[0] = GENERATOR_KINDS[gen_kind]
        self.gen[1] = np.uint64(seed & 0xFFFFFFFFFFFFFFFF)
        self.act = np.zeros(1, dtype=np.uint64)
        self.act[0] = np.uint64((seed ^ 0x9E3779B97F4A7C15) & 0xFFFFFFFFFFFFFFFF)
        self.cur_pre = np.empty(N_FEATURES, dtype=np.float64)
        K.reset_state(self.state, self.gen)
        K.empty_board_features(height, self.cur_pre)

    def _alloc(self, n):
        return {
            "pre": np.empty((n, N_FEATURES), dtype=np.float64),
            "feats": np.empty((n, MAX_ACTIONS, N_FEATURES), dtype=np.float64),
            "mask": np.empty((n, MAX_ACTIONS), dtype=np.uint8),
            "actions": np.empty(n, dtype=np.int64),
            "logp": np.empty(n, dtype=np.float64),
            "rewards": np.empty(n, dtype=np.float64),
            "dones": np.empty(n, dtype=np.int64),
        }

    def collect(self, theta: np.ndarray, tau: float, n_target: int,
                stop_on_done: bool) -> dict[str, np.ndarray]:
        out = self._alloc(n_target)
        n = K.collect_steps(
            self.state, self.height, self.gen, self.act, theta, tau, self.cur_pre,
            n_target, 1 if stop_on_done else 0,
            out["pre"], out["feats"], out["mask"], out["actions"], out["logp"],
            out["rewards"], out["dones"],
        )
        return {k: v[:n] for k, v in out.items()}

    def collect_episode(self, theta: np.ndarray, tau: float, max_steps: int,
                        chunk: int = 8192) -> dict[str, np.ndarray]:
        """Roll one episode to termination (or max_steps) in chunks."""
        parts = []
        total = 0
        while total < max_steps:
            part = self.collect(theta, tau, min(chunk, max_steps - total), True)
            parts.append(part)
            total += len(part["actions"])
            if len(part["dones"]) and part["dones"][-1]:
                break
        return {k: np.concatenate([p[k] for p in parts]) for k in parts[0]}


@dataclass
class TrainResult:
    algo: str
    policy: LinearPolicy
    critic: LinearCritic
    curve: list[tuple[float, float, float]]  # (episode-or-step, return, seconds)
    env_steps: int
    updates: int
    seconds: float
    seed: int
    truncated_episodes: int = 0


def _probe_scores(theta: np.ndarray, hp: Hyperparams, seeds: np.ndarray) -> np.ndarray:
    """Greedy evaluation episodes: the learning-curve probe plays the current
    weights deterministically (sampled play blurs a linear policy of this
    scale into noise; the published per-cycle test scores require greedy)."""
    out = np.zeros(len(seeds), dtype=np.int64)
    steps = np.zeros(len(seeds), dtype=np.int64)
    fin = np.zeros(len(seeds), dtype=np.int64)
    K.greedy_game_many(theta, hp.board_height, GENERATOR_KINDS[hp.gen_kind],
                       seeds, 10 ** 7, out, steps, fin)
    return out


def train_reinforce(hp: Hyperparams, seed: int = 0,
                    init_policy: LinearPolicy | None = None) -> TrainResult:
    """Monte-Carlo policy gradient, no baseline, temperature-annealed."""
    runner = EnvRunner(hp.board_height, hp.gen_kind, seed)
    policy = init_policy.copy() if init_policy else LinearPolicy()
    start = time.perf_counter()
    curve = []
    steps = 0
    truncated = 0
    for ep in range(hp.episodes):
        tau = temperature(ep, hp.tau0, hp.tau_k)
        data = runner.collect_episode(policy.weights, tau, hp.max_episode_steps)
        steps += len(data["actions"])
        if not data["dones"][-1]:
            truncated += 1
        G = returns_to_go(data["rewards"], hp.gamma)
        policy = reinforce_update(policy, data["feats"], data["mask"],
                                  data["actions"], G, hp.lr_actor, tau)
        curve.append((ep, float(data["rewards"].sum()), time.perf_counter() - start))
    return TrainResult(REINFORCE, policy, LinearCritic(), curve, steps, hp.episodes,
                       time.perf_counter() - start, seed, truncated)


def train_trajectory_ppo(hp: Hyperparams, seed: int = 0,
                         init_policy: LinearPolicy | None = None) -> TrainResult:
    """One full episode per update cycle: GAE, then epoch passes of the
    clipped surrogate over the whole trajectory."""
    runner = EnvRunner(hp.board_height, hp.gen_kind, seed)
    policy = init_policy.copy() if init_policy else LinearPolicy()
    critic = LinearCritic()
    actor_opt = Adam(N_FEATURES)
    critic_opt = Adam(N_FEATURES + 1)
    start = time.perf_counter()
    curve = []
    steps = 0
    truncated = 0
    for ep in range(hp.episodes):
        tau = temperature(ep, hp.tau0, hp.tau_k)
        data = runner.collect_episode(policy.weights, tau, hp.max_episode_steps)
        steps += len(data["actions"])
        if not data["dones"][-1]:
            truncated += 1
        idx = np.arange(len(data["actions"]))
        chosen = data["feats"][idx, data["actions"]]
        deltas = td_deltas(data["rewards"], critic.values(data["pre"]),
                           critic.values(chosen), data["dones"], hp.gamma)
        adv = gae(deltas, hp.gamma, hp.lam, data["dones"])
        targets = adv + critic.values(data["pre"])
        for _ in range(hp.epochs):
            policy, critic = ppo_update(
                policy, critic, data["feats"], data["mask"], data["actions"],
                data["logp"], adv, targets, data["pre"],
                eps=hp.clip_eps, lr_actor=hp.lr_actor, lr_critic=hp.lr_critic,
                tau=tau, adv_norm=hp.adv_norm,
                actor_opt=actor_opt, critic_opt=critic_opt,
            )
        curve.append((ep, float(data["rewards"].sum()), time.perf_counter() - start))
    return TrainResult(TRAJECTORY_PPO, policy, critic, curve, steps, hp.episodes,
                       time.perf_counter() - start, seed, truncated)


def train_buffer_ppo(hp: Hyperparams, seed: int = 0,
                     init_policy: LinearPolicy | None = None) -> TrainResult:
    """Update every batch_size environment steps; episodes continue across
    buffer boundaries. Learning rates decay linearly over total steps, and
    each update cycle is followed by a greedy evaluation probe."""
    rng = np.random.default_rng(seed)
    probe_rng = np.random.default_rng(seed + 0x5EED)
    runner = EnvRunner(hp.board_height, hp.gen_kind, seed)
    policy = init_policy.copy() if init_policy else LinearPolicy()
    critic = LinearCritic()
    actor_opt = Adam(N_FEATURES)
    critic_opt = Adam(N_FEATURES + 1)
    start = time.perf_counter()
    curve = []
    steps = 0
    updates = 0
    episodes_done = 0
    while steps < hp.total_steps:
        if not hp.anneal_tau:
            tau = hp.fixed_tau
        else:
            index = steps if hp.anneal_index == "step" else episodes_done
            tau = temperature(index, hp.tau0, hp.tau_k)
        n_target = min(hp.batch_size, hp.total_steps - steps)
        data = runner.collect(policy.weights, tau, n_target, False)
        n = len(data["actions"])
        steps_before = steps
        steps += n
        episodes_done += int(data["dones"].sum())

        idx = np.arange(n)
        chosen = data["feats"][idx, data["actions"]]
        deltas = td_deltas(data["rewards"], critic.values(data["pre"]),
                           critic.values(chosen), data["dones"], hp.gamma)
        adv = gae(deltas, hp.gamma, hp.lam, data["dones"])
        targets = adv + critic.values(data["pre"])

        lr_a = linear_lr(hp.lr_actor, steps_before, hp.total_steps)
        lr_c = linear_lr(hp.lr_critic, steps_before, hp.total_steps)
        for _ in range(hp.epochs):
            order = rng.permutation(n)
            for lo in range(0, n, hp.mini_batch):
                mb = order[lo:lo + hp.mini_batch]
                policy, critic = ppo_update(
                    policy, critic, data["feats"][mb], data["mask"][mb],
                    data["actions"][mb], data["logp"][mb], adv[mb], targets[mb],
                    data["pre"][mb], eps=hp.clip_eps, lr_actor=lr_a, lr_critic=lr_c,
                    tau=tau, adv_norm=hp.adv_norm,
                    actor_opt=actor_opt, critic_opt=critic_opt,
                )
        updates += 1

        if hp.probe_episodes > 0:
            probe_seeds = probe_rng.integers(0, 2 ** 62, size=hp.probe_episodes)
            scores = _probe_scores(policy.weights, hp, probe_seeds)
            curve.append((steps, float(scores.mean()), time.perf_counter() - start))
        else:
            curve.append((steps, float("nan"), time.perf_counter() - start))
    return TrainResult(BUFFER_PPO, policy, critic, curve, steps, updates,
                       time.perf_counter() - start, seed)


TRAINERS = {
    REINFORCE: train_reinforce,
    TRAJECTORY_PPO: train_trajectory_ppo,
    BUFFER_PPO: train_buffer_ppo,
}

DEFAULT_HP = {
    REINFORCE: Hyperparams.reinforce,
    TRAJECTORY_PPO: Hyperparams.trajectory_ppo,
    BUFFER_PPO: Hyperparams.buffer_ppo,
}
