"""Tour of the scaling-regime classifier.

Walks a few parameter choices through `classify` and prints how the axes
partition, what normalization exponent comes out, and when the limit is a
fractional Brownian sheet.

Run:  python demos/regime_tour.py
"""

import json

from osgrf import classify, theorem13_case


def show(alphas, primes, label):
    rep = classify(alphas, primes)
    print("=" * 64)
    print(label)
    print("  alpha  =", list(alphas), " alpha' =", list(primes))
    if not rep.valid:
        print("  INVALID:", "; ".join(rep.reasons))
        return
    print("  gamma0 = %.6g   partition = %s" % (rep.gamma0, list(rep.partition)))
    print("  H      = %.6g   critical = %s   fBs = %s"
          % (rep.H, rep.is_critical, rep.is_fbs))
    if rep.is_fbs:
        print("  Hurst  =", ["%.6g" % h for h in rep.hurst])
    print("  Holder =", ["%.6g" % h for h in rep.holder])


show([0.3], [1.0], "d=1 heavy-tailed walk under diffusive windowing")
show([0.3], [0.3], "d=1 critically scaled (window n^{1/alpha})")
show([0.6, 0.6], [0.6, 0.6], "d=2 critical: full anisotropic limit, no sheet")
show([0.35, 0.3], [0.35, 0.6], "d=2, second axis over-windowed -> Brownian factor")
show([0.35, 0.6], [0.35, 0.8], "d=2, second axis degenerates to an invariant direction")
show([0.7, 0.5], [0.7, 0.75], "d=2 boundary where the invariant direction is ill-posed")
show([0.5], [1.0], "d=1 with alpha = 1/2: no centered limit")

print("=" * 64)
print("the four fractional-sheet windows with the first axis critically scaled:")
for trip in [(0.35, 0.3, 0.6), (0.35, 0.6, 0.8), (0.35, 0.6, 0.4), (0.7, 0.6, 0.4)]:
    case, beta, h1, h2, form = theorem13_case(*trip)
    print("  alpha=(%.2f, %.2f), alpha2'=%.2f -> case (%s): "
          "S_n / n^%.4g, Hurst (%.4g, %.4g), variance %s"
          % (trip[0], trip[1], trip[2], case, beta, h1, h2, form))
