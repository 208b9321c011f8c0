#!/usr/bin/env python3
"""High-precision evaluation of the closed-form values frozen into the tests.

Independent of the C++ code: every quantity is evaluated directly from the
scoring formulas with mpmath at 50 significant digits, Jacobians by exact
symbolic differentiation of the formulas (mpmath.diff on the scalar maps).
"""

import mpmath as mp

mp.mp.dps = 50


def softmax(z):
    e = [mp.e ** x for x in z]
    s = sum(e)
    return [x / s for x in e]


def variant(z, kind, eps=mp.mpf("1e-10")):
    a = softmax(z)
    lo, hi = min(z), max(z)
    if kind == "baseline":
        c = [1] * len(z)
    elif kind == "v1":
        c = list(z)
    elif kind == "v2":
        c = [x - lo for x in z]
    elif kind == "v3":
        c = [(x - lo) / (hi - lo + eps) for x in z]
    elif kind == "v4":
        l0, h0 = min(lo, 0), max(hi, 0)
        c = [(x - l0) / (h0 - l0 + eps) for x in z]
    return [ci * ai for ci, ai in zip(c, a)]


def jacobian(z, kind):
    n = len(z)
    J = [[0] * n for _ in range(n)]
    for k in range(n):
        for j in range(n):
            def f(t, j=j, k=k):
                zz = list(z)
                zz[k] = t
                return variant(zz, kind)[j]
            J[j][k] = mp.diff(f, z[k])
    return J


def frob(J):
    return mp.sqrt(sum(x * x for row in J for x in row))


def show(label, v):
    print(f"{label}: {mp.nstr(v, 17)}")


z = [mp.mpf(1), mp.mpf(2)]
for i, v in enumerate(softmax(z)):
    show(f"softmax([1,2])[{i}]", v)
for i, v in enumerate(variant(z, "v4")):
    show(f"v4([1,2])[{i}]", v)
a = softmax(z)
show("softmax jac diag at [1,2]", a[0] * (1 - a[0]))
for i, v in enumerate(variant([mp.mpf(-10), mp.mpf(-1)], "v1")):
    show(f"v1([-10,-1])[{i}]", v)

z = [mp.mpf(10), 0, 0, 0]
Jb, J1 = jacobian(z, "baseline"), jacobian(z, "v1")
show("alpha0 at [10,0,0,0]", softmax(z)[0])
show("baseline diag_peak g=10", Jb[0][0])
show("v1 diag_peak g=10", J1[0][0])
show("frob ratio v1/baseline g=10", frob(J1) / frob(Jb))
for g in range(2, 17, 2):
    zg = [mp.mpf(g), 0, 0, 0]
    fb, f1 = frob(jacobian(zg, "baseline")), frob(jacobian(zg, "v1"))
    print(f"g={g} frob_baseline={mp.nstr(fb, 10)} ratio={mp.nstr(f1 / fb, 10)}")
for g in range(4, 17, 2):
    zg = [mp.mpf(-g), 0, 0, 0]
    # extrema index is 0 at the trough; mp.diff on a kink-free neighbourhood
    rb = sum(abs(x) for x in jacobian(zg, "baseline")[0])
    r2 = sum(abs(x) for x in jacobian(zg, "v2")[0])
    print(f"trough g={g} rowgrad baseline={mp.nstr(rb, 10)} v2={mp.nstr(r2, 10)}")
show("uniform T=4 frob", frob(jacobian([mp.mpf(0)] * 4, "baseline")))
show("3/sqrt(2)", 3 / mp.sqrt(2))
