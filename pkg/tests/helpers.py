"""Shared fixtures and independent oracles used across the test suite."""

import numpy as np

from cauchyflow import (FrameRotation, GradientTrace, graph_patch, normal_at,
                        AnalyticFlow, AnalyticScalarField)


def flat_patch(n=68, lo=-1.0, hi=1.0, mu=1.0, orientation="below"):
    return graph_patch(0.0, 0.0, lo, hi, n, mu=mu, orientation=orientation)


def sine_patch(n=68, amplitude=0.3, lo=-1.0, hi=1.0, mu=1.0, orientation="below"):
    return graph_patch(lambda x: amplitude * np.sin(x),
                       lambda x: amplitude * np.cos(x),
                       lo, hi, n, mu=mu, orientation=orientation)


def test_patches(n=68, mu=1.0):
    """The two standard shapes every conversion test runs on."""
    return {"flat": flat_patch(n, mu=mu), "sine": sine_patch(n, mu=mu)}


def traction_oracle(f1, f2, f3, p, gamma_prime, mu, orientation="below"):
    """Independent traction path: build sigma = 2 mu eps - p I, contract with nu.

    Deliberately avoids traction_from_gradient so the two code paths share
    nothing beyond the inputs.
    """
    f1, f2, f3, p = (np.asarray(v, dtype=float) for v in (f1, f2, f3, p))
    eps11, eps12, eps22 = f1, 0.5 * (f2 + f3), -f1
    mu = np.asarray(mu, dtype=float)
    s11 = 2.0 * mu * eps11 - p
    s12 = 2.0 * mu * eps12
    s22 = 2.0 * mu * eps22 - p
    nu = normal_at(gamma_prime, orientation)
    return s11 * nu[..., 0] + s12 * nu[..., 1], s12 * nu[..., 0] + s22 * nu[..., 1]


def restrict(a, times=1):
    """Drop `times` margin layers (2 nodes per end each) from an array."""
    k = 2 * times
    return np.asarray(a)[k:-k]


def max_abs_diff(*pairs):
    return max(float(np.max(np.abs(np.asarray(a) - np.asarray(b)))) for a, b in pairs)


def dn_arrays(dn):
    return dn.u.c1.values, dn.u.c2.values, dn.dnu.c1.values, dn.dnu.c2.values, dn.p.values


def stress_arrays(st):
    return st.u.c1.values, st.u.c2.values, st.traction.c1.values, st.traction.c2.values


def local_poly_interp(x_nodes, y_nodes, x, k=8):
    """Degree k-1 polynomial interpolation through the k nodes nearest x."""
    x_nodes = np.asarray(x_nodes, dtype=float)
    y_nodes = np.asarray(y_nodes, dtype=float)
    i = int(np.searchsorted(x_nodes, x))
    lo = max(0, min(i - k // 2, x_nodes.shape[0] - k))
    window = slice(lo, lo + k)
    center = x_nodes[lo]
    coef = np.polynomial.polynomial.polyfit(x_nodes[window] - center, y_nodes[window], k - 1)
    return float(np.polynomial.polynomial.polyval(x - center, coef))


def rotated_flow(flow, angle):
    """The flow carried along by a global rotation: u'(x) = R u(R^T x)."""
    rot = FrameRotation(angle)
    r = rot.matrix

    def back(x1, x2):
        q = rot.inverse().apply(np.stack(np.broadcast_arrays(x1, x2), axis=-1))
        return q[..., 0], q[..., 1]

    def hess(x1, x2):
        q1, q2 = back(x1, x2)
        h = np.empty(np.shape(q1) + (2, 2))
        h[..., 0, 0] = flow.psi_11(q1, q2)
        h[..., 0, 1] = h[..., 1, 0] = flow.psi_12(q1, q2)
        h[..., 1, 1] = flow.psi_22(q1, q2)
        return np.einsum("ij,...jk,lk->...il", r, h, r)

    def grad(x1, x2):
        q1, q2 = back(x1, x2)
        g = np.stack(np.broadcast_arrays(flow.psi_1(q1, q2), flow.psi_2(q1, q2)), axis=-1)
        return rot.apply(g)

    return AnalyticFlow(
        name=f"{flow.name}@{angle:g}",
        psi=lambda x1, x2: flow.psi(*back(x1, x2)),
        psi_1=lambda x1, x2: grad(x1, x2)[..., 0],
        psi_2=lambda x1, x2: grad(x1, x2)[..., 1],
        psi_11=lambda x1, x2: hess(x1, x2)[..., 0, 0],
        psi_12=lambda x1, x2: hess(x1, x2)[..., 0, 1],
        psi_22=lambda x1, x2: hess(x1, x2)[..., 1, 1],
    )


def rotated_field(field, angle):
    """Scalar field carried along by a global rotation."""
    rot = FrameRotation(angle)

    def back(x1, x2):
        q = rot.inverse().apply(np.stack(np.broadcast_arrays(x1, x2), axis=-1))
        return q[..., 0], q[..., 1]

    def grad(x1, x2):
        q1, q2 = back(x1, x2)
        g = np.stack(np.broadcast_arrays(field.d1(q1, q2), field.d2(q1, q2)), axis=-1)
        return rot.apply(g)

    return AnalyticScalarField(
        name=f"{field.name}@{angle:g}",
        value=lambda x1, x2: field.value(*back(x1, x2)),
        d1=lambda x1, x2: grad(x1, x2)[..., 0],
        d2=lambda x1, x2: grad(x1, x2)[..., 1],
    )
