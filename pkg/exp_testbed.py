"""Scratch testbed for TD3 coupling variants (not part of the package)."""
import time
import numpy as np
from eegcopilot import gridworld as gw
from eegcopilot import rl_td3 as rl
from eegcopilot import tinynet as tn
from eegcopilot.rl_td3 import _one_hot_batch, _softmax


def evaluate_reach(agent, cfg, n=500):
    g = cfg.grid_size
    eval_rng = np.random.default_rng(123)
    center = ((g - 1) // 2, (g - 1) // 2)
    wins = 0
    for _ in range(n):
        while True:
            t = (int(eval_rng.integers(g)), int(eval_rng.integers(g)))
            if t != center:
                break
        state = gw.EnvState(center, t, None, 0)
        ok = False
        for _ in range(gw.manhattan(center, t) + 2):
            a = rl.select_action(agent, gw.observe_rl(state, g))
            state, out = gw.step(state, a, cfg, eval_rng)
            if out.terminal:
                break
            if gw.Event.REACHED_VISIBLE in out.events:
                ok = True
                break
        wins += ok
    return wins / n


def probe(agent, g=16, n=400):
    test_rng = np.random.default_rng(11)
    crit_opt = act_opt = agree = m = 0
    for _ in range(n):
        p = (int(test_rng.integers(g)), int(test_rng.integers(g)))
        t = (int(test_rng.integers(g)), int(test_rng.integers(g)))
        if p == t:
            continue
        m += 1
        obs = gw.observe_rl(gw.EnvState(p, t, None, 0), g)
        qs = [float(tn.forward(agent.critic1, np.concatenate([obs, gw.one_hot(a)]))[0]) for a in range(4)]
        ac = int(np.argmax(qs))
        aa = int(np.argmax(tn.forward(agent.actor, obs)))
        good = set()
        if t[0] > p[0]:
            good.add(1)
        if t[0] < p[0]:
            good.add(0)
        if t[1] > p[1]:
            good.add(2)
        if t[1] < p[1]:
            good.add(3)
        crit_opt += ac in good
        act_opt += aa in good
        agree += ac == aa
    return crit_opt / m, act_opt / m, agree / m


def train_variant(
    steps=40_000,
    actor_mode="softmax",       # "softmax" | "expected"
    target_mode="actor",        # "actor" | "maxq"
    policy_delay=2,
    eps_end=0.05,
    gamma=0.99,
    reg=0.01,
    actor_lr=3e-4,
    seed=7,
):
    rng = np.random.default_rng(seed)
    cfg = gw.EnvConfig(invisible_spawn_prob=0.0)
    g = 16
    hp = rl.Hyperparams(total_steps=steps, eps_end=eps_end, gamma=gamma,
                        policy_delay=policy_delay, actor_logit_reg=reg)
    agent = rl.make_agent(rng, hp)
    adam_actor = tn.init_adam(agent.actor, actor_lr)
    adam_c1 = tn.init_adam(agent.critic1, hp.learning_rate)
    adam_c2 = tn.init_adam(agent.critic2, hp.learning_rate)
    buf = rl.ReplayBuffer(hp.buffer_capacity)

    def critic_targets(batch):
        s_next = batch["s_next"]
        if target_mode == "actor":
            a_next = np.argmax(tn.forward(agent.target_actor, s_next), axis=1)
            x = np.hstack([s_next, _one_hot_batch(a_next)])
            q1 = tn.forward(agent.target_critic1, x)[:, 0]
            q2 = tn.forward(agent.target_critic2, x)[:, 0]
            qn = np.minimum(q1, q2)
        else:
            m = s_next.shape[0]
            q1s = np.stack([
                tn.forward(agent.target_critic1, np.hstack([s_next, np.tile(gw.one_hot(a), (m, 1))]))[:, 0]
                for a in range(4)], axis=1)
            a_next = np.argmax(q1s, axis=1)
            x = np.hstack([s_next, _one_hot_batch(a_next)])
            q2 = tn.forward(agent.target_critic2, x)[:, 0]
            qn = np.minimum(q1s[np.arange(m), a_next], q2)
        return batch["r"] + gamma * (1 - batch["terminal"]) * qn

    def update_critics(batch):
        y = critic_targets(batch)
        x = np.hstack([batch["s"], _one_hot_batch(batch["a"])])
        m = y.shape[0]
        for c, ad in ((agent.critic1, adam_c1), (agent.critic2, adam_c2)):
            q = tn.forward(c, x)[:, 0]
            grads, _ = tn.backward(c, x, (2.0 / m) * (q - y)[:, None])
            tn.adam_step(c, ad, grads)

    def update_actor(batch, t):
        if t % policy_delay != 0:
            return
        s = batch["s"]
        m = s.shape[0]
        logits = tn.forward(agent.actor, s)
        p = _softmax(logits)
        if actor_mode == "softmax":
            x = np.hstack([s, p])
            _, gx = tn.backward(agent.critic1, x, np.full((m, 1), -1.0 / m))
            gp = gx[:, 4:]
        else:
            qs = np.stack([
                tn.forward(agent.critic1, np.hstack([s, np.tile(gw.one_hot(a), (m, 1))]))[:, 0]
                for a in range(4)], axis=1)
            gp = -qs / m
        glogits = p * (gp - (gp * p).sum(axis=1, keepdims=True))
        if reg > 0:
            glogits = glogits + (2.0 * reg / m) * logits
        grads, _ = tn.backward(agent.actor, s, glogits)
        tn.adam_step(agent.actor, adam_actor, grads)
        tn.soft_update(agent.target_actor, agent.actor, agent.tau)
        tn.soft_update(agent.target_critic1, agent.critic1, agent.tau)
        tn.soft_update(agent.target_critic2, agent.critic2, agent.tau)

    state = gw.reset(cfg, rng)
    ep = 0
    for t in range(1, steps + 1):
        eps = rl.epsilon_at(hp, t)
        obs = gw.observe_rl(state, g)
        a = rl.select_action(agent, obs, explore=True, rng=rng, eps=eps)
        ns, out = gw.step(state, a, cfg, rng)
        buf.push(obs, int(a), out.reward, gw.observe_rl(ns, g), out.terminal,
                 float(gw.Event.FAILED in out.events))
        ep += 1
        if out.terminal or ep >= hp.episode_cap:
            state = gw.reset(cfg, rng)
            ep = 0
        else:
            state = ns
        if len(buf) >= max(hp.warmup_steps, hp.batch_size):
            batch = buf.sample(hp.batch_size, rng)
            update_critics(batch)
            update_actor(batch, t)
    return agent, cfg


if __name__ == "__main__":
    variants = [
        dict(actor_mode="softmax", target_mode="actor", policy_delay=2),
        dict(actor_mode="softmax", target_mode="actor", policy_delay=1),
        dict(actor_mode="expected", target_mode="actor", policy_delay=2),
        dict(actor_mode="expected", target_mode="actor", policy_delay=1),
        dict(actor_mode="softmax", target_mode="maxq", policy_delay=2),
        dict(actor_mode="expected", target_mode="maxq", policy_delay=2),
        dict(actor_mode="softmax", target_mode="actor", policy_delay=2, actor_lr=1e-3),
    ]
    for v in variants:
        t0 = time.perf_counter()
        agent, cfg = train_variant(**v)
        dt = time.perf_counter() - t0
        reach = evaluate_reach(agent, cfg)
        co, ao, ag = probe(agent)
        print(f"{v}: reach={reach:.3f} critic_opt={co:.3f} actor_opt={ao:.3f} agree={ag:.3f} ({dt:.0f}s)")
