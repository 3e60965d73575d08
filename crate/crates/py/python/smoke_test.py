"""Smoke test for the pestpulse extension module.

    pip install --no-build-isolation -e crates/py
    python crates/py/python/smoke_test.py
"""

import math

import pestpulse as pp


def check(cond, what):
    if not cond:
        raise SystemExit(f"FAIL {what}")
    print(f"ok   {what}")


check(pp.normalize_text("  Aphid,  ATTACK!! ") == "aphid attack", "normalize_text")
check(pp.match_distance("whitfly", "whitefly") == 1, "match_distance one edit")
check(pp.match_distance("wheat", "whitefly") is None, "match_distance far")

lex = pp.PestLexicon.reference()
label = lex.label("how to control whitfly in cotton")
check(len(lex) >= 10 and "pod borer" in lex.ids(), "reference lexicon")
check(label is not None and label.pest_id == "whitefly" and label.distance == 1, "label misspelling")
check(lex.label("market rate of wheat") is None, "no label")

walk = [0.0]
noise = pp.simulate((0, 0, 0), 300, seed=7, intercept=0.0)
for e in noise[1:]:
    walk.append(walk[-1] + e)
adf = pp.adf_test(walk)
check(not adf.stationary_at_5pct, "random walk keeps its unit root")
check(pp.adf_test(noise).stationary_at_5pct, "white noise is stationary")
c1, c5, c10 = adf.critical_values
check(c1 < c5 < c10, "critical values ordered")
try:
    from statsmodels.tsa.stattools import adfuller

    ref = adfuller(walk, regression="c", autolag="AIC")
    check(abs(ref[0] - adf.statistic) < 1e-6 and ref[2] == adf.lags_used, "adf agrees with statsmodels")
except ImportError:
    print("skip statsmodels comparison")

counts = [50 + 40 * math.sin(2 * math.pi * t / 12) + t + 5 * e for t, e in enumerate(noise[:120])]
st = pp.stationarize(counts)
back = st.invert(st.series)
check(max(abs(a - b) for a, b in zip(back, counts)) < 1e-9, "stationarize inverts")

r = pp.acf(noise, 10)
check(r[0] == 1.0 and all(abs(v) <= 1 for v in r), "acf")

y = pp.simulate((1, 0, 1), 1500, seed=3, ar=[0.6], ma=[0.3])
model = pp.fit(y, (1, 0, 1))
check(abs(model.ar[0] - 0.6) < 0.1 and abs(model.ma[0] - 0.3) < 0.1, f"fit recovers ARMA(1,1): {model}")
f = model.forecast(y, 12, 0.9)
check(all(lo <= p <= hi for lo, p, hi in zip(f.lower, f.point, f.upper)), "forecast intervals")
check(all(b >= a - 1e-12 for a, b in zip(f.se, f.se[1:])), "se non-decreasing")
m = pp.evaluate(f, f.point)
check(m["rmse"] == 0.0 and m["ci_coverage"] == 1.0, "evaluate perfect forecast")

seasonal = pp.simulate((1, 0, 0), 240, seed=5, seasonal=(1, 0, 0, 12), ar=[0.3], sar=[0.7])
best, board = pp.grid_search(seasonal, periods=[12], max_order=1, max_diff=0)
check(best.order[3] == 1 and best.order[6] == 12, f"grid search finds the seasonal AR: {best}")
check(board == sorted(board, key=lambda e: e[1]), "leaderboard sorted by aic")
print("all checks passed")
