"""Acceptance suite: one test per criterion, each printing a pass/fail line.

Every check runs at its stated tolerance and under its runtime limit; the
``criterion`` fixture (see conftest.py) records the verdict and time.
"""
import csv
import itertools
import json
import math

import numpy as np
import pytest

from covertkey import concentration, estimator, oneshot, protocol, rates
from covertkey.channel import StateDmc, example_fig2
from covertkey.cli import main
from covertkey.probcore import Pmf


def d_bits(a, b):
    a, b = np.asarray(a, float), np.asarray(b, float)
    m = a > 0
    return float(np.sum(a[m] * np.log2(a[m] / b[m])))


def chi2_plain(a, b):
    a, b = np.asarray(a, float), np.asarray(b, float)
    return float(np.sum((a - b) ** 2 / b))


def d_bern(a, b):
    return d_bits([a, 1 - a], [b, 1 - b])


# -- 1 ---------------------------------------------------------------------------


def random_product_channel(rng, ny, nz):
    pmf = lambda k: Pmf(tuple(range(k)), rng.dirichlet(np.ones(k)))  # noqa: E731
    p0 = pmf(ny)
    p = {(0, 0): p0, (0, 1): p0, (1, 0): pmf(ny), (1, 1): pmf(ny)}
    q = {(x, s): pmf(nz) for x in (0, 1) for s in (0, 1)}
    return StateDmc.independent(p, q)


def test_criterion_1_product_channel_identity(criterion):
    with criterion(1, "passive bounds coincide on product channels", 1.0) as c:
        rng = np.random.default_rng(2024)
        channels = [example_fig2()] + [random_product_channel(rng, 3, 3) for _ in range(20)]
        worst = 0.0
        for ch in channels:
            lo, hi = rates.passive_bounds(ch)
            w = ch.tensor
            p1, p0 = w[1, 0].sum(axis=1), w[0, 0].sum(axis=1)
            q1, q0 = w[1, 0].sum(axis=0), w[0, 0].sum(axis=0)
            hand = math.sqrt(2 / chi2_plain(q1, q0)) * d_bits(p1, p0)
            worst = max(worst, abs(lo - hand), abs(hi - hand))
        c["detail"] = f"max deviation {worst:.2e} over {len(channels)} channels"
        assert worst <= 1e-12


# -- 2 ---------------------------------------------------------------------------


def test_criterion_2_fig2_rate_shape(criterion):
    with criterion(2, "example-channel rate curves: ordering and endpoints", 1.0) as c:
        ch = example_fig2()
        pts = rates.rate_curve(ch, rates.beta_grid(101), "derived")
        assert len(pts) == 101
        assert all(p.converse >= p.achievable - 1e-12 for p in pts)
        assert abs(pts[0].converse - pts[0].achievable) <= 1e-9
        assert abs(pts[-1].converse - pts[-1].achievable) <= 1e-9
        # hand evaluation: Bob sees Bern(0.9)/Bern(0.8) vs Bern(0.1); Willie BSC(0.4)/BSC(0.3)
        r0 = math.sqrt(2 / chi2_plain([0.4, 0.6], [0.6, 0.4])) * d_bern(0.9, 0.1)
        r1 = math.sqrt(2 / chi2_plain([0.3, 0.7], [0.7, 0.3])) * d_bern(0.8, 0.1)
        assert abs(pts[0].achievable - r0) <= 1e-3 and abs(r0 - 8.7848) <= 1e-3
        assert abs(pts[-1].achievable - r1) <= 1e-3 and abs(r1 - 3.1853) <= 1e-3
        c["detail"] = f"R(0)={pts[0].achievable:.6f} R(1)={pts[-1].achievable:.6f}"


# -- 3 ---------------------------------------------------------------------------


def test_criterion_3_lemma1_suite(criterion):
    with criterion(3, "Chernoff-type lemma: probability and expectation bounds", 60.0) as c:
        grid = [(1000, 0.1, 0.3), (10_000, 0.5, 0.5), (1000, 0.5, 0.2)]
        checks = concentration.lemma1_suite(grid, 1_000_000, seed=1)
        assert len(checks) == 6
        worst = max(ch.empirical - ch.bound for ch in checks)
        c["detail"] = f"max(empirical - bound) = {worst:.3e}"
        for ch in checks:
            assert ch.trials == 1_000_000
            assert ch.empirical <= ch.bound + 3 * ch.sigma, ch


# -- 4 ---------------------------------------------------------------------------


def test_criterion_4_oneshot_bounds(criterion):
    with criterion(4, "one-shot reliability and secrecy bounds", 300.0) as c:
        src = oneshot.binary_chain_source(0.5, 0.1, 0.2)
        rng = np.random.default_rng(4)
        notes = []
        for m1 in (2, 4):
            for m2 in (2, 4):
                r = oneshot.verify_oneshot_bounds(src, m1, m2, 1000, rng)
                assert r.codebooks >= 1000
                assert r.mean_error <= r.error_bound + 3 * r.error_se
                assert r.mean_leakage <= r.secrecy_bound + 3 * r.leakage_se
                notes.append(f"({m1},{m2}) err {r.mean_error:.3f}<={r.error_bound:.3g}")
        c["detail"] = "; ".join(notes)


# -- 5 ---------------------------------------------------------------------------


def test_criterion_5_estimator_suite(criterion):
    with criterion(5, "state-weight estimator deviation and halting", 120.0) as c:
        checks = estimator.estimator_suite(
            example_fig2(), n_prime=5000, beta=0.3, lams=(0.05, 0.1, 0.2), ells=(100, 1000),
            trials=20_000, halt=(10_000, 0.05, 0.15), seed=5,
        )
        assert [ch.name for ch in checks] == ["deviation"] * 6 + ["halting"]
        for ch in checks:
            assert ch.empirical <= ch.bound + 3 * ch.sigma, ch
        vacuous = sum(ch.bound >= 1 for ch in checks)
        c["detail"] = f"{vacuous} of {len(checks)} bounds are >= 1 on this channel"


# -- 6 ---------------------------------------------------------------------------


def test_criterion_6_covertness_quadratic(criterion):
    with criterion(6, "covertness divergence against its quadratic approximation", 1.0) as c:
        ch = example_fig2()
        alpha = 1e-3
        worst = 0.0
        for beta in (0.0, 0.5, 1.0):
            exact, quad = rates.covertness_quadratic_check(ch, alpha, beta)
            hand_exact = (1 - beta) * d_bern(alpha * 0.6 + (1 - alpha) * 0.4, 0.4) + beta * d_bern(
                alpha * 0.7 + (1 - alpha) * 0.3, 0.3
            )
            c0, c1 = chi2_plain([0.4, 0.6], [0.6, 0.4]), chi2_plain([0.3, 0.7], [0.7, 0.3])
            hand_quad = 0.5 * alpha**2 * ((1 - beta) * c0 + beta * c1) / math.log(2)
            assert exact == pytest.approx(hand_exact, rel=1e-9)
            assert quad == pytest.approx(hand_quad, rel=1e-12)
            worst = max(worst, abs(exact - quad) / exact)
        c["detail"] = f"max relative error {worst:.2e}"
        assert worst < 0.01


# -- 7 ---------------------------------------------------------------------------

TOY7 = {"n": 6, "g": 2, "alpha": 0.3, "kappa": 0.1, "code_count": 4, "m_override": [2, 2, 2],
        "states": {"kind": "constant-weight", "beta": 0.5}, "trials": 100_000}


def test_criterion_7_end_to_end(criterion, tmp_path):
    with criterion(7, "end-to-end Monte Carlo agrees with exact enumeration", 300.0) as c:
        cfg = tmp_path / "toy.json"
        cfg.write_text(json.dumps(TOY7))
        runs = []
        for name in ("a", "b"):
            out = tmp_path / f"{name}.jsonl"
            assert main(["simulate", "--seed", "7", "--config", str(cfg), "--out", str(out)]) == 0
            runs.append(out)
        assert runs[0].read_bytes() == runs[1].read_bytes()
        summaries = [r.with_name(r.name + ".summary.csv").read_bytes() for r in runs]
        assert summaries[0] == summaries[1]
        with open(runs[0].with_name(runs[0].name + ".summary.csv"), newline="") as fh:
            row = next(csv.DictReader(fh))
        trials, done = int(row["trials"]), int(row["completed"])
        assert trials == 100_000
        p_mc, p_ex = float(row["p_e"]), float(row["p_e_exact"])
        s_mc, s_ex, s_sig = float(row["secrecy_tv_mc"]), float(row["secrecy_tv"]), float(row["secrecy_sigma"])
        p_sig = math.sqrt(p_ex * (1 - p_ex) / done)
        assert abs(p_mc - p_ex) <= 4 * p_sig
        assert abs(s_mc - s_ex) <= 4 * s_sig
        c["detail"] = (
            f"p_e {p_mc:.4f} vs {p_ex:.4f} ({abs(p_mc - p_ex) / p_sig:.2f} sigma); "
            f"secrecy {s_mc:.5f} vs {s_ex:.5f} ({abs(s_mc - s_ex) / s_sig:.2f} sigma)"
        )


# -- 8 ---------------------------------------------------------------------------


def brute_force_metrics(ch, s, cfg, cb):
    """Error probability and tv(P_{W1 W2 Z}, P_{W1 W2} x P_Z) by direct enumeration.

    Written independently of the exact evaluator: sequence laws are built
    position by position with itertools, and the encoder and decoder are
    queried one sequence at a time.
    """
    n, n_prime, kap = cfg.n, cfg.n_prime, cfg.kappa
    px = (1 - cfg.alpha, cfg.alpha)
    seqs = list(itertools.product(range(2), repeat=n))
    enc = {y: oneshot.encoder_distribution(np.array(y), cb)[0] for y in seqs}
    dec = {(x, w2): oneshot.mmi_decode(np.array(x), w2, cb) for x in seqs for w2 in range(cb.m2)}

    weights, proceed = {}, 0.0
    for k in range(cfg.g + 1):
        for probes in itertools.combinations(range(n_prime), k):
            w = kap**k * (1 - kap) ** (n_prime - k)
            coding = [i for i in range(n_prime) if i not in probes][:n]
            pattern = tuple(int(s[i]) for i in coding)
            weights[pattern] = weights.get(pattern, 0.0) + w
            proceed += w

    p_err = 0.0
    joint = np.zeros((cb.m1, cb.m2, len(seqs)))
    for pattern, w in weights.items():
        w /= proceed
        for x in seqs:
            for y in seqs:
                pxy = 1.0
                for t in range(n):
                    pxy *= px[x[t]] * ch.tensor[x[t], pattern[t]][y[t]].sum()
                for w1 in range(cb.m1):
                    for w2 in range(cb.m2):
                        if dec[(x, w2)] != w1:
                            p_err += w * pxy * enc[y][w1, w2]
        for y in seqs:
            for zi, z in enumerate(seqs):
                pyz = 1.0
                for t in range(n):
                    st = pattern[t]
                    pyz *= sum(px[a] * ch.tensor[a, st][y[t], z[t]] for a in (0, 1))
                joint[:, :, zi] += w * pyz * enc[y]
    keys = joint.sum(axis=2)
    pz = joint.sum(axis=(0, 1))
    return p_err, 0.5 * float(np.abs(joint - keys[:, :, None] * pz[None, None, :]).sum())


def test_criterion_8_derandomization(criterion):
    with criterion(8, "derandomized code family meets eps' on every state sequence", 300.0) as c:
        ch = example_fig2()
        cfg = protocol.ProtocolConfig(n=5, g=1, alpha=0.3, kappa=0.1, code_count=32, seed=11,
                                      m_override=(1, 4, 2))
        states = []
        for ones in list(itertools.combinations(range(cfg.n_prime), 3))[:8]:
            st = np.zeros(cfg.n_prime, dtype=int)
            st[list(ones)] = 1
            states.append(st)
        eps_prime = 0.08
        family = protocol.CodeFamily(ch, cfg)
        res = protocol.derandomize(family, states, eps_prime, np.random.default_rng(8))
        assert res.L >= math.floor(2 / eps_prime * (1 + cfg.n)) + 1
        assert eps_prime > 2 * math.log2(1 + res.eps)

        per_code = {}
        for k in sorted(set(res.indices)):
            cb = family.codebook(k, cfg.m_override)
            per_code[k] = [brute_force_metrics(ch, st, cfg, cb) for st in states]
        worst = 0.0
        for i, avg in enumerate(res.averages):
            pe = np.mean([per_code[k][i][0] for k in res.indices])
            sec = np.mean([per_code[k][i][1] for k in res.indices])
            assert pe == pytest.approx(avg["p_error"], abs=1e-10)
            assert sec == pytest.approx(avg["secrecy"], abs=1e-10)
            assert pe <= eps_prime and sec <= eps_prime
            worst = max(worst, pe, sec)
        c["detail"] = f"L={res.L}, family eps={res.eps:.4f}, worst re-verified average {worst:.4f}"
