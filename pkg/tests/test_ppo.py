import json

import numpy as np
import pytest

from sodfeeder.nets import MLP, Adam, log_softmax, orthogonal, softmax
from sodfeeder.ppo import (CHECKPOINT_VERSION, PPOTrainer, actor_loss_and_grad,
                           clip_g, collect_rollouts, compute_gae,
                           critic_loss_and_grad, gae_from_deltas, greedy_action,
                           load_checkpoint, save_checkpoint, td_error)
from sodfeeder.scenario import PPOConfig

from oracles import gae_direct
from toyenvs import BanditEnv


# ---- nets -------------------------------------------------------------------

def test_orthogonal_init_is_orthogonal():
    rng = np.random.default_rng(0)
    w = orthogonal(rng, (8, 8), gain=1.0)
    assert np.allclose(w @ w.T, np.eye(8), atol=1e-10)
    w2 = orthogonal(rng, (4, 2), gain=2.0)
    assert np.allclose(w2.T @ w2, 4.0 * np.eye(2), atol=1e-10)


def test_softmax_log_softmax_consistent():
    logits = np.array([[1000.0, 1001.0, 999.0], [0.0, 0.0, 0.0]])
    p = softmax(logits)
    assert np.allclose(p.sum(axis=1), 1.0)
    assert np.all(np.isfinite(log_softmax(logits)))
    assert np.allclose(np.exp(log_softmax(logits)), p)


def test_mlp_forward_backward_finite_difference():
    rng = np.random.default_rng(1)
    net = MLP([3, 5, 2], rng)
    x = rng.standard_normal((7, 3))
    target = rng.standard_normal((7, 2))

    def loss_at(flat):
        net.set_flat_params(flat)
        out, _ = net.forward(x)
        return float(np.sum((out - target) ** 2))

    flat = net.flat_params()
    out, cache = net.forward(x)
    grads = net.backward(cache, 2.0 * (out - target))
    flat_grad = np.concatenate([g.ravel() for g in grads])
    h = 1e-6
    for idx in rng.choice(flat.size, size=25, replace=False):
        e = np.zeros_like(flat)
        e[idx] = h
        num = (loss_at(flat + e) - loss_at(flat - e)) / (2 * h)
        assert num == pytest.approx(flat_grad[idx], rel=1e-5, abs=1e-7)
    net.set_flat_params(flat)


def test_adam_moves_towards_minimum():
    rng = np.random.default_rng(2)
    p = [np.array([5.0])]
    opt = Adam(p, lr=0.1)
    x = p
    for _ in range(500):
        g = [2.0 * x[0]]
        x = opt.step(x, g)
    assert abs(x[0][0]) < 1e-3


def test_mlp_raises_on_nonfinite():
    rng = np.random.default_rng(3)
    net = MLP([2, 3, 1], rng)
    net.W[-1] = net.W[-1] * np.inf
    with pytest.raises(FloatingPointError):
        net.forward(np.ones((1, 2)))


# ---- advantage estimation ---------------------------------------------------

def test_td_error_hand_computed():
    # r=1, V(s)=2, V(s')=3, discount 0.9 -> 1 + 2.7 - 2 = 1.7
    assert td_error(1.0, 2.0, 3.0, 0.9, 0.0) == pytest.approx(1.7)
    # done cuts the bootstrap: 1 - 2 = -1
    assert td_error(1.0, 2.0, 3.0, 0.9, 1.0) == pytest.approx(-1.0)
    # 0.08 case: r=0.1, V=0.5, V'=0.5, discount 0.96
    assert td_error(0.1, 0.5, 0.5, 0.96, 0.0) == pytest.approx(0.08)


def test_gae_matches_double_loop_oracle():
    rng = np.random.default_rng(7)
    for _ in range(200):
        T = int(rng.integers(1, 11))
        deltas = rng.standard_normal(T)
        dones = (rng.random(T) < 0.3).astype(float)
        g = float(rng.uniform(0.8, 1.0))
        lam = float(rng.uniform(0.8, 1.0))
        adv = gae_from_deltas(deltas, g, lam, dones)
        want = gae_direct(deltas, g, lam, dones)
        assert np.allclose(adv, want, atol=1e-12)


def test_compute_gae_returns_equal_adv_plus_values():
    rng = np.random.default_rng(8)
    T, N = 6, 3
    rewards = rng.standard_normal((T, N))
    values = rng.standard_normal((T, N))
    dones = np.zeros((T, N))
    dones[-1] = 1.0
    last = rng.standard_normal(N)
    adv, ret = compute_gae(rewards, values, dones, last, 0.99, 0.95)
    assert np.allclose(ret, adv + values)
    # with lam=1, discount=1 and no termination the advantage telescopes to
    # sum(rewards) + last_value - values[0]
    dones0 = np.zeros((T, N))
    adv2, _ = compute_gae(rewards, values, dones0, last, 1.0, 1.0)
    want = rewards.sum(axis=0) + last - values[0]
    assert np.allclose(adv2[0], want)


def test_clip_g_hand_computed():
    assert clip_g(0.2, 1.0) == pytest.approx(1.2)
    assert clip_g(0.2, -1.0) == pytest.approx(-0.8)
    assert np.allclose(clip_g(0.1, np.array([2.0, -2.0])), [2.2, -1.8])


# ---- surrogate gradients ----------------------------------------------------

def _rand_actor_batch(rng, n=12, obs=4, acts=2):
    net = MLP([obs, 2, acts], rng)
    states = rng.standard_normal((n, obs))
    actions = rng.integers(0, acts, size=n)
    logits, _ = net.forward(states)
    logp = log_softmax(logits)[np.arange(n), actions]
    old_logp = logp + rng.uniform(-0.3, 0.3, size=n)
    adv = rng.standard_normal(n)
    return net, states, actions, old_logp, adv


@pytest.mark.parametrize("ent", [0.0, 0.01])
def test_actor_gradient_matches_finite_differences(ent):
    rng = np.random.default_rng(11)
    for _ in range(10):
        net, states, actions, old_logp, adv = _rand_actor_batch(rng)
        loss, grads, _ = actor_loss_and_grad(net, states, actions, old_logp,
                                             adv, 0.2, ent)
        flat = net.flat_params()
        flat_grad = np.concatenate([g.ravel() for g in grads])

        def loss_at(f):
            net.set_flat_params(f)
            l, _, _ = actor_loss_and_grad(net, states, actions, old_logp,
                                          adv, 0.2, ent)
            return l

        h = 1e-6
        for idx in rng.choice(flat.size, size=10, replace=False):
            e = np.zeros_like(flat)
            e[idx] = h
            num = (loss_at(flat + e) - loss_at(flat - e)) / (2 * h)
            denom = max(1.0, abs(num), abs(flat_grad[idx]))
            assert abs(num - flat_grad[idx]) / denom < 1e-4
        net.set_flat_params(flat)


def test_critic_gradient_matches_finite_differences():
    rng = np.random.default_rng(12)
    net = MLP([4, 2, 1], rng)
    states = rng.standard_normal((9, 4))
    targets = rng.standard_normal(9)
    _, grads = critic_loss_and_grad(net, states, targets)
    flat = net.flat_params()
    flat_grad = np.concatenate([g.ravel() for g in grads])

    def loss_at(f):
        net.set_flat_params(f)
        l, _ = critic_loss_and_grad(net, states, targets)
        return l

    h = 1e-6
    for idx in range(flat.size):
        e = np.zeros_like(flat)
        e[idx] = h
        num = (loss_at(flat + e) - loss_at(flat - e)) / (2 * h)
        assert num == pytest.approx(flat_grad[idx], rel=1e-4, abs=1e-7)


def test_ratio_one_identity():
    # old_logp taken from the current policy: loss = -mean(adv), zero clip
    rng = np.random.default_rng(13)
    net = MLP([4, 2, 3], rng)
    states = rng.standard_normal((20, 4))
    actions = rng.integers(0, 3, size=20)
    logits, _ = net.forward(states)
    old_logp = log_softmax(logits)[np.arange(20), actions]
    adv = rng.standard_normal(20)
    loss, _, stats = actor_loss_and_grad(net, states, actions, old_logp,
                                         adv, 0.2)
    assert loss == pytest.approx(-adv.mean())
    assert stats["clip_frac"] == 0.0
    assert stats["approx_kl"] == pytest.approx(0.0, abs=1e-12)


def test_clipped_samples_have_zero_gradient():
    # one sample far outside the trust region contributes no gradient
    rng = np.random.default_rng(14)
    net = MLP([2, 2, 2], rng)
    states = np.array([[1.0, 0.0]])
    actions = np.array([0])
    logits, _ = net.forward(states)
    logp = log_softmax(logits)[0, 0]
    old_logp = np.array([logp - 2.0])      # ratio e^2 >> 1.2, adv > 0
    _, grads, stats = actor_loss_and_grad(net, states, actions, old_logp,
                                          np.array([1.0]), 0.2)
    assert stats["clip_frac"] == 1.0
    assert all(np.allclose(g, 0.0) for g in grads)


# ---- rollouts, updates, checkpoints -----------------------------------------

def make_trainer(n_envs=4, seed=0, lr=0.02):
    cfg = PPOConfig(n_envs=n_envs, learning_rate=lr, minibatch_size=32,
                    epochs=4, anneal_lr=False)
    return PPOTrainer(env_factory=lambda i: BanditEnv(), obs_dim=2,
                      n_actions=4, config=cfg, seed=seed, n_envs=n_envs)


def test_rollout_shapes_and_reward_bookkeeping():
    tr = make_trainer()
    batch = collect_rollouts(tr.envs, tr.actor, tr.critic, 16,
                             [0, 1, 2, 3], tr.action_rngs, tr.config)
    assert batch.states.shape == (16, 4, 2)
    assert batch.actions.shape == (16, 4)
    assert np.all(batch.dones[-1] == 1.0)
    assert np.all(batch.dones[:-1] == 0.0)
    assert batch.advantages.shape == (16, 4)


def test_bandit_learning_quickly():
    cfg = PPOConfig(anneal_lr=False)
    tr = PPOTrainer(env_factory=lambda i: BanditEnv(), obs_dim=2,
                    n_actions=4, config=cfg, seed=1, n_envs=8)
    for u in range(40):
        tr.run_update(list(range(8)))
    probs = softmax(tr.actor.forward(np.array([[1.0, 0.0]]))[0])[0]
    assert probs[2] > 0.9
    assert greedy_action(tr.actor, np.array([1.0, 0.0])) == 2


def test_single_env_replays_env_zero():
    tr8 = make_trainer(n_envs=8, seed=5)
    tr1 = make_trainer(n_envs=1, seed=5)
    # identical nets: parameter draws depend only on the seed
    for a, b in zip(tr8.actor.params, tr1.actor.params):
        assert np.allclose(a, b)
    seeds = list(range(100, 108))
    b8 = collect_rollouts(tr8.envs, tr8.actor, tr8.critic, 16, seeds,
                          tr8.action_rngs, tr8.config)
    b1 = collect_rollouts(tr1.envs, tr1.actor, tr1.critic, 16, seeds[:1],
                          tr1.action_rngs, tr1.config)
    assert np.array_equal(b8.actions[:, 0], b1.actions[:, 0])
    assert np.allclose(b8.rewards[:, 0], b1.rewards[:, 0])
    assert np.allclose(b8.log_probs[:, 0], b1.log_probs[:, 0])


def test_training_stats_csv(tmp_path):
    tr = make_trainer()
    tr.train(list(range(8)), 3)
    path = tmp_path / "stats.csv"
    tr.stats.to_csv(path)
    lines = path.read_text().strip().splitlines()
    assert lines[0] == ("update,env_steps,mean_episode_reward,value_loss,"
                        "policy_loss,entropy,approx_kl,clip_frac")
    assert len(lines) == 4


def test_checkpoint_round_trip(tmp_path):
    tr = make_trainer()
    tr.run_update([0, 1, 2, 3])
    path = tmp_path / "policy.npz"
    save_checkpoint(path, tr.actor, tr.critic, tr.config)
    actor, critic, meta = load_checkpoint(path)
    assert meta["layout_version"] == CHECKPOINT_VERSION
    for a, b in zip(actor.params, tr.actor.params):
        assert np.array_equal(a, b)
    x = np.array([[1.0, 0.0]])
    assert np.allclose(actor.forward(x)[0], tr.actor.forward(x)[0])
    assert np.allclose(critic.forward(x)[0], tr.critic.forward(x)[0])


def test_checkpoint_version_mismatch_rejected(tmp_path):
    tr = make_trainer()
    path = tmp_path / "policy.npz"
    save_checkpoint(path, tr.actor, tr.critic, tr.config,
                    layout_version="sod-state-v0")
    with pytest.raises(ValueError):
        load_checkpoint(path)
    # explicit opt-out still loads
    actor, _, meta = load_checkpoint(path, expected_layout=None)
    assert meta["layout_version"] == "sod-state-v0"


def test_lr_annealing_schedule():
    cfg = PPOConfig(n_envs=2, anneal_lr=True, learning_rate=0.01,
                    minibatch_size=16, epochs=1)
    tr = PPOTrainer(env_factory=lambda i: BanditEnv(), obs_dim=2,
                    n_actions=4, config=cfg, seed=0, n_envs=2)
    tr.train([0, 1], 4)
    # after the last update the step size has decayed to lr/n_updates
    assert tr.actor_opt.lr == pytest.approx(0.01 * (1 - 3 / 4))
