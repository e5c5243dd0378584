"""Generate frozen high-precision reference values for the statistical tests.

Computes every statistic and tail probability with mpmath at 50 significant
digits, then rounds once to double precision.  The output JSON is committed;
tests compare the package's double-precision results against these values and
never recompute them, so the oracle stays independent of the implementation
under test.

Run from the repository root:  python3 tests/tools/gen_stat_fixtures.py
"""

from __future__ import annotations

import json
import random
from fractions import Fraction
from pathlib import Path

import mpmath as mp

mp.mp.dps = 50

OUT = Path(__file__).resolve().parents[1] / "data" / "stat_fixtures.json"


def f(x: mp.mpf) -> str:
    """Round to double once and serialize exactly (shortest round-trip repr)."""
    return repr(float(x))


def normal_two_sided(z: mp.mpf) -> mp.mpf:
    return mp.erfc(abs(z) / mp.sqrt(2))


def t_two_sided(t: mp.mpf, df: mp.mpf) -> mp.mpf:
    x = df / (df + t * t)
    return mp.betainc(df / 2, mp.mpf(1) / 2, 0, x, regularized=True)


def gen_two_proportion(rng: random.Random, n_cases: int) -> list[dict]:
    cases = []
    sizes = [10, 25, 40, 75, 120, 300, 500, 1000, 2500, 5000]
    while len(cases) < n_cases:
        n1 = rng.choice(sizes)
        n2 = rng.choice(sizes)
        k1 = rng.randint(1, n1 - 1)
        k2 = rng.randint(1, n2 - 1)
        pooled = Fraction(k1 + k2, n1 + n2)
        if pooled in (0, 1):
            continue
        p = mp.mpf(pooled.numerator) / pooled.denominator
        se = mp.sqrt(p * (1 - p) * (mp.mpf(1) / n1 + mp.mpf(1) / n2))
        z = (mp.mpf(k1) / n1 - mp.mpf(k2) / n2) / se
        cases.append(
            {
                "k1": k1,
                "n1": n1,
                "k2": k2,
                "n2": n2,
                "statistic": f(z),
                "p_value": f(normal_two_sided(z)),
            }
        )
    return cases


def gen_welch(rng: random.Random, n_cases: int) -> list[dict]:
    cases = []
    # The documented worked example first: {1,2,3} vs {4,5,6}.
    pools = [([1, 2, 3], [4, 5, 6])]
    while len(pools) < n_cases:
        na = rng.randint(2, 40)
        nb = rng.randint(2, 40)
        shift = rng.choice([0, 1, 3, 10])
        scale = rng.choice([1, 2, 5])
        a = [rng.randint(0, 40) for _ in range(na)]
        b = [rng.randint(0, 40) * scale + shift for _ in range(nb)]
        if len(set(a)) < 2 and len(set(b)) < 2:
            continue
        pools.append((a, b))
    for a, b in pools:
        na, nb = len(a), len(b)
        ma = mp.fsum(a) / na
        mb = mp.fsum(b) / nb
        va = mp.fsum((x - ma) ** 2 for x in a) / (na - 1)
        vb = mp.fsum((x - mb) ** 2 for x in b) / (nb - 1)
        sa, sb = va / na, vb / nb
        t = (ma - mb) / mp.sqrt(sa + sb)
        df = (sa + sb) ** 2 / (sa**2 / (na - 1) + sb**2 / (nb - 1))
        cases.append(
            {
                "a": a,
                "b": b,
                "statistic": f(t),
                "df": f(df),
                "p_value": f(t_two_sided(t, df)),
            }
        )
    return cases


def gen_pearson(rng: random.Random, n_cases: int) -> list[dict]:
    cases = []
    while len(cases) < n_cases:
        n = rng.randint(3, 50)
        x = [rng.randint(0, 100) for _ in range(n)]
        noise = rng.choice([1, 5, 20, 60])
        slope = rng.choice([-3, -1, 1, 2])
        y = [slope * xi + rng.randint(-noise, noise) for xi in x]
        if len(set(x)) < 2 or len(set(y)) < 2:
            continue
        mx = mp.fsum(x) / n
        my = mp.fsum(y) / n
        sxx = mp.fsum((a - mx) ** 2 for a in x)
        syy = mp.fsum((b - my) ** 2 for b in y)
        sxy = mp.fsum((a - mx) * (b - my) for a, b in zip(x, y))
        r = sxy / mp.sqrt(sxx * syy)
        if abs(r) >= mp.mpf("0.9999"):
            continue
        df = n - 2
        t = r * mp.sqrt(df / (1 - r * r))
        cases.append(
            {
                "x": x,
                "y": y,
                "statistic": f(r),
                "df": float(df),
                "p_value": f(t_two_sided(t, mp.mpf(df))),
            }
        )
    return cases


def main() -> None:
    rng = random.Random(20240817)
    fixtures = {
        "two_proportion": gen_two_proportion(rng, 20),
        "welch": gen_welch(rng, 20),
        "pearson": gen_pearson(rng, 10),
    }
    OUT.parent.mkdir(parents=True, exist_ok=True)
    OUT.write_text(json.dumps(fixtures, indent=2) + "\n", encoding="utf-8")
    total = sum(len(v) for v in fixtures.values())
    print(f"wrote {total} fixtures to {OUT}")


if __name__ == "__main__":
    main()
