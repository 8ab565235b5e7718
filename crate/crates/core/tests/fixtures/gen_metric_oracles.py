#!/usr/bin/env python3
"""Regenerates metric_oracles.json with 50-digit mpmath reference values.

    python3 gen_metric_oracles.py > metric_oracles.json
"""
import json
import random

import mpmath as mp
from scipy import stats

mp.mp.dps = 50
rng = random.Random(20240611)
N = 120


def rand_dist(zeros=True):
    w = [rng.random() for _ in range(4)]
    if zeros and rng.random() < 0.3:
        for i in rng.sample(range(4), rng.randint(1, 3)):
            w[i] = 0.0
    s = sum(w)
    p = [x / s for x in w]
    return p


def jsd(p, q):
    p = [mp.mpf(x) for x in p]
    q = [mp.mpf(x) for x in q]
    m = [(a + b) / 2 for a, b in zip(p, q)]

    def kl(a, b):
        return mp.fsum(x * mp.log(x / y, 2) for x, y in zip(a, b) if x > 0)

    return (kl(p, m) + kl(q, m)) / 2


def softmax(xs):
    live = [mp.mpf(x) for x in xs if x is not None]
    top = max(live)
    w = [mp.e ** (mp.mpf(x) - top) if x is not None else mp.mpf(0) for x in xs]
    s = mp.fsum(w)
    return [x / s for x in w]


def ttest(xs, mu0=0.0):
    n = len(xs)
    xs = [mp.mpf(x) for x in xs]
    mean = mp.fsum(xs) / n
    var = mp.fsum((x - mean) ** 2 for x in xs) / (n - 1)
    t = (mean - mu0) / mp.sqrt(var / n)
    df = n - 1
    p = mp.betainc(mp.mpf(df) / 2, mp.mpf(1) / 2, 0, df / (df + t * t), regularized=True)
    return mean, mp.sqrt(var), t, p


def f(x):
    return float(x)


out = {"jsd": [], "softmax": [], "expected_los": [], "ttest": [], "paired_ttest": []}

for _ in range(N):
    p, q = rand_dist(), rand_dist()
    out["jsd"].append({"p": p, "q": q, "expected": f(jsd(p, q))})

for _ in range(N):
    xs = [rng.uniform(-30, 5) for _ in range(4)]
    if rng.random() < 0.3:
        for i in rng.sample(range(4), rng.randint(1, 3)):
            xs[i] = None
    out["softmax"].append({"scores": xs, "expected": [f(x) for x in softmax(xs)]})

for _ in range(N):
    p = rand_dist()
    days = [rng.uniform(0.5, 3), rng.uniform(3.01, 7), rng.uniform(7.01, 14), rng.uniform(14.01, 40)]
    e = mp.fsum(mp.mpf(a) * mp.mpf(b) for a, b in zip(p, days))
    out["expected_los"].append({"p": p, "days": days, "expected": f(e)})

for _ in range(N):
    n = rng.randint(2, 40)
    loc = rng.uniform(-1, 1)
    xs = [rng.gauss(loc, rng.uniform(0.1, 3)) for _ in range(n)]
    mean, sd, t, p = ttest(xs)
    ref = stats.ttest_1samp(xs, 0.0).pvalue
    assert abs(ref - f(p)) < 1e-9 * max(1.0, ref) or abs(ref - f(p)) < 1e-12, (ref, p)
    out["ttest"].append({"x": xs, "mean": f(mean), "std": f(sd), "t": f(t), "p": f(p)})

for _ in range(N):
    n = rng.randint(2, 40)
    xs = [rng.uniform(0, 1) for _ in range(n)]
    ys = [x + rng.gauss(0.05, 0.2) for x in xs]
    d = [x - y for x, y in zip(xs, ys)]
    _, _, t, p = ttest(d)
    ref = stats.ttest_rel(xs, ys).pvalue
    assert abs(ref - f(p)) < 1e-9, (ref, p)
    out["paired_ttest"].append({"x": xs, "y": ys, "t": f(t), "p": f(p)})

print(json.dumps(out, indent=1))
