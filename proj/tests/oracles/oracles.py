"""Independent high-precision reference values frozen into the C++ tests.

Run with `python3 tests/oracles/oracles.py`; every value printed here appears
verbatim in a test. Nothing in this file imports the library.
"""

import mpmath as mp

mp.mp.dps = 40


def show(name, value):
    print(f"{name:48s} {mp.nstr(value, 20)}")


def hermite(r0, r1, f0, f1, d0, d1):
    """Coefficients (a, b, c, d) of a r^3 + b r^2 + c r + d by solving the 4x4 system."""
    A = mp.matrix([[r0**3, r0**2, r0, 1], [r1**3, r1**2, r1, 1], [3 * r0**2, 2 * r0, 1, 0], [3 * r1**2, 2 * r1, 1, 0]])
    return mp.lu_solve(A, mp.matrix([f0, f1, d0, d1]))


def cubic(c, r):
    return c[0] * r**3 + c[1] * r**2 + c[2] * r + c[3]


# Geometry
R = 5 / mp.pi
show("sphere orthogonal distance", R * mp.pi / 2)
show("poincare paper d(0,(0.5,0))", mp.acosh(1 + mp.mpf("0.25") / (1 * (1 - mp.mpf("0.25")))))
show("poincare log_weight x component", mp.acosh(mp.mpf(4) / 3) / 2)
show("poincare metric factor at 0.5", 4 / (1 - mp.mpf("0.25")) ** 2)
show("factor2 d(0,(0.3,0))", mp.acosh(1 + 2 * mp.mpf("0.09") / (1 - mp.mpf("0.09"))))
show("2 atanh(0.3)", 2 * mp.atanh(mp.mpf("0.3")))


def r0(D):
    k = mp.cosh(D) - 1
    return (2 + 1 / k - mp.sqrt(4 / k + 1 / k**2)) / 2


for D in (5, mp.mpf("0.5"), 1, 2):
    show(f"hyperbolic ball radius D={D}", r0(D))
# Paper-convention diameter of the ball of radius r0(5): points at +-r0 on a diameter.
x = r0(5)
show("paper distance between +-r0(5)", mp.acosh(1 + (2 * x) ** 2 / (1 - x**2) ** 2))

# Kernels
show("hermite [0,1] at 0.5", cubic(hermite(0, 1, 0, 1, 0, 0), mp.mpf("0.5")))
a = 1 / mp.sqrt(2) - mp.mpf("0.01")
b = 1 / mp.sqrt(2)
od1 = hermite(a, b, 1, mp.mpf("0.1"), 0, 0)
od2 = hermite(mp.mpf("0.99"), 1, mp.mpf("0.1"), 0, 0, 0)
for i, name in enumerate("abcd"):
    show(f"OD blend 1 {name}", od1[i])
for i, name in enumerate("abcd"):
    show(f"OD blend 2 {name}", od2[i])
show("OD blend 1 midpoint", cubic(od1, (a + b) / 2))
show("OD phi(0.995)", cubic(od2, mp.mpf("0.995")))

eps, sig = 10, 1
phi_lj = lambda r: 24 * eps / sig**2 * ((sig / r) ** 8 - 2 * (sig / r) ** 14)
dphi_lj = lambda r: mp.diff(phi_lj, r)
show("LJ phi(1)", phi_lj(1))
show("LJ phi'(1)", dphi_lj(1))
show("LJ constant branch", phi_lj(1) - dphi_lj(1) / 4)
show("LJ phi(2)", phi_lj(2))
show("LJ phi(3)", phi_lj(3))

# LJ on the sphere (R_M = 5): cubic taper on [4.95, 5].
lj_tail = hermite(mp.mpf("4.95"), 5, phi_lj(mp.mpf("4.95")), 0, dphi_lj(mp.mpf("4.95")), 0)
show("LJ R_M=5 phi(4.975)", cubic(lj_tail, mp.mpf("4.975")))

# PS1 phi_11 linear continuation below 0.01, value at 0.005
p11 = lambda r: 1 - 1 / r**2
show("PS1 phi11(0.005) ramp", p11(mp.mpf("0.01")) + mp.diff(p11, mp.mpf("0.01")) * (mp.mpf("0.005") - mp.mpf("0.01")))
p21 = lambda r: mp.mpf("3.5") / r**3
show("PS1 phi21(0.5)", p21(mp.mpf("0.5")))
show("PS1 phi21(0.005) ramp", p21(mp.mpf("0.01")) + mp.diff(p21, mp.mpf("0.01")) * (mp.mpf("0.005") - mp.mpf("0.01")))

# Dynamics energy: P(d) = 1/2 int_0^d r phi(r) dr, E = 1/N sum_{i != i'} P(d).
def od_phi(r):
    if r < a:
        return mp.mpf(1)
    if r < b:
        return cubic(od1, r)
    if r < mp.mpf("0.99"):
        return mp.mpf("0.1")
    if r < 1:
        return cubic(od2, r)
    return mp.mpf(0)


def od_P(d):
    pts = [p for p in (0, a, b, mp.mpf("0.99"), 1) if p < d] + [d]
    return mp.quad(lambda r: r * od_phi(r), pts) / 2


show("OD energy N=2 d=0.3", 2 * od_P(mp.mpf("0.3")) / 2)
show("OD energy N=2 d=0.9", 2 * od_P(mp.mpf("0.9")) / 2)
show("OD first moment to 1", 2 * od_P(mp.mpf(1)))

# Metrics: OD under the uniform measure on [0, 1.2]
val = mp.quad(lambda r: (od_phi(r) * r) ** 2, [0, a, b, mp.mpf("0.99"), 1, mp.mpf("1.2")]) / mp.mpf("1.2")
show("OD L2(uniform[0,1.2]) norm", mp.sqrt(val))

# Basis
show("n_star(500,500,20,2)", (250000 / mp.log(250000)) ** (mp.mpf(1) / 3) * mp.sqrt(20))
show("n_star(3,1,1,1)", (3 / mp.log(3)) ** (mp.mpf(1) / 3))

# Learning: 1x1 flat system, N=2 at distance d, constant basis, phi = c
d = mp.mpf("0.7")
show("flat 1x1 A for d=0.7", d**2 / 4)

# Flat two-body problem, phi = 1, N = 2: separation decays as exp(-t)
show("two-body separation factor exp(-1)", mp.e ** -1)
