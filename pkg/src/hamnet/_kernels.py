"""Compiled inner loops.

Networks are stored as flat parameter vectors: for each layer the
``(fan_in, fan_out)`` weight matrix in row-major order followed by its bias.
A bank of networks is a 2-D array with one flat vector per row.
"""

import math

import numpy as np
from numba import njit

ACT_ELU = 0
ACT_SCALED_ELU = 1
ACT_LINEAR = 2

SELU_LAMBDA = 1.0507
SELU_ALPHA = 1.6733


@njit(cache=True)
def activate(z, mode):
    if mode == ACT_LINEAR:
        return z
    if mode == ACT_ELU:
        return z if z > 0.0 else math.expm1(z)
    return SELU_LAMBDA * (z if z > 0.0 else SELU_ALPHA * math.expm1(z))


@njit(cache=True)
def activate_grad(z, mode):
    if mode == ACT_LINEAR:
        return 1.0
    if mode == ACT_ELU:
        return 1.0 if z > 0.0 else math.exp(z)
    return SELU_LAMBDA * (1.0 if z > 0.0 else SELU_ALPHA * math.exp(z))


@njit(cache=True)
def n_params(sizes):
    p = 0
    for l in range(len(sizes) - 1):
        p += sizes[l] * sizes[l + 1] + sizes[l + 1]
    return p


@njit(cache=True)
def forward_cached(theta, sizes, x, out_mode, z, h):
    """Dense forward pass.

    ``h`` receives all layer activations (input first), ``z`` all
    pre-activations (first hidden layer first).
    """
    nl = len(sizes) - 1
    for k in range(sizes[0]):
        h[k] = x[k]
    p = 0
    h_in = 0
    h_out = sizes[0]
    z_off = 0
    for l in range(nl):
        fi = sizes[l]
        fo = sizes[l + 1]
        mode = out_mode if l == nl - 1 else ACT_ELU
        b_off = p + fi * fo
        for o in range(fo):
            s = theta[b_off + o]
            for k in range(fi):
                s += h[h_in + k] * theta[p + k * fo + o]
            z[z_off + o] = s
            h[h_out + o] = activate(s, mode)
        p = b_off + fo
        h_in = h_out
        h_out += fo
        z_off += fo
    return h[h_in:h_in + sizes[nl]]


@njit(cache=True)
def forward(theta, sizes, x, out_mode):
    z = np.empty(sizes[1:].sum())
    h = np.empty(sizes.sum())
    return forward_cached(theta, sizes, x, out_mode, z, h).copy()


@njit(cache=True)
def gradient(theta, sizes, x, action, target, out_mode, grad):
    """Gradient of ``(q[action] - target)**2`` into ``grad``; returns the loss."""
    nl = len(sizes) - 1
    z = np.empty(sizes[1:].sum())
    h = np.empty(sizes.sum())
    q = forward_cached(theta, sizes, x, out_mode, z, h)
    err = q[action] - target
    # layer offsets
    p_off = np.empty(nl, dtype=np.int64)
    h_off = np.empty(nl + 1, dtype=np.int64)
    z_off = np.empty(nl, dtype=np.int64)
    p = 0
    hh = 0
    zz = 0
    for l in range(nl):
        p_off[l] = p
        h_off[l] = hh
        z_off[l] = zz
        p += sizes[l] * sizes[l + 1] + sizes[l + 1]
        hh += sizes[l]
        zz += sizes[l + 1]
    h_off[nl] = hh

    delta = np.zeros(sizes[nl])
    last = nl - 1
    delta[action] = 2.0 * err * activate_grad(z[z_off[last] + action], out_mode)
    for l in range(nl - 1, -1, -1):
        fi = sizes[l]
        fo = sizes[l + 1]
        w0 = p_off[l]
        b0 = w0 + fi * fo
        for o in range(fo):
            grad[b0 + o] = delta[o]
        for k in range(fi):
            hk = h[h_off[l] + k]
            for o in range(fo):
                grad[w0 + k * fo + o] = hk * delta[o]
        if l > 0:
            prev = np.zeros(fi)
            for k in range(fi):
                s = 0.0
                for o in range(fo):
                    s += theta[w0 + k * fo + o] * delta[o]
                prev[k] = s * activate_grad(z[z_off[l - 1] + k], ACT_ELU)
            delta = prev
    return err * err


@njit(cache=True)
def adam_train(theta, m, v, t, sizes, x, action, target, lr, out_mode, beta1, beta2, eps):
    """One Adam step on a single sample; ``t`` is a length-1 step counter.

    Returns the pre-update loss, or NaN when the gradient is non-finite (no
    update is applied in that case).
    """
    g = np.empty(theta.shape[0])
    loss = gradient(theta, sizes, x, action, target, out_mode, g)
    for k in range(g.shape[0]):
        if not np.isfinite(g[k]):
            return np.nan
    t[0] += 1
    c1 = 1.0 - beta1 ** t[0]
    c2 = 1.0 - beta2 ** t[0]
    for k in range(g.shape[0]):
        m[k] = beta1 * m[k] + (1.0 - beta1) * g[k]
        v[k] = beta2 * v[k] + (1.0 - beta2) * g[k] * g[k]
        theta[k] -= lr * (m[k] / c1) / (math.sqrt(v[k] / c2) + eps)
    return loss


# --------------------------------------------------------------------------
# Hamiltonian increments and observations


@njit(cache=True)
def degree_term(k, a1, a2):
    return a1 * k * k + a2 * k * k * k


@njit(cache=True)
def delta_h_radius(i, r_new, radii, active, A, deg, dist, factor, coeffs, max_rule,
                   own_only, new_row):
    """Exact change of the Hamiltonian when agent ``i`` takes radius ``r_new``.

    ``new_row`` receives agent ``i``'s adjacency row after the change.
    """
    a1, a2, a3, a4 = coeffs[0], coeffs[1], coeffs[2], coeffs[3]
    n = radii.shape[0]
    ri = radii[i]
    dh = a3 * (r_new * r_new - ri * ri)
    k_old = float(deg[i])
    k_new = k_old
    link_sum = 0.0
    for j in range(n):
        new_row[j] = A[i, j]
        if j == i or not active[j]:
            continue
        rj = radii[j]
        if max_rule:
            reach = r_new if r_new > rj else rj
        else:
            reach = r_new if r_new < rj else rj
        linked = dist[i, j] <= factor[i, j] * reach
        if linked != A[i, j]:
            new_row[j] = linked
            s = 1.0 if linked else -1.0
            k_new += s
            link_sum += s / dist[i, j]
            if not own_only:
                kj = float(deg[j])
                dh += degree_term(kj + s, a1, a2) - degree_term(kj, a1, a2)
    dh += degree_term(k_new, a1, a2) - degree_term(k_old, a1, a2)
    dh += (1.0 if own_only else 2.0) * a4 * link_sum
    return dh


@njit(cache=True)
def apply_row(i, r_new, radii, A, deg, new_row):
    n = radii.shape[0]
    for j in range(n):
        if j != i and new_row[j] != A[i, j]:
            s = 1 if new_row[j] else -1
            deg[j] += s
            deg[i] += s
            A[i, j] = new_row[j]
            A[j, i] = new_row[j]
    radii[i] = r_new


@njit(cache=True)
def observe(i, radii, active, deg, dist, n_active, L, dim, d_floor, out):
    ri = radii[i]
    count = 0
    for j in range(radii.shape[0]):
        if j != i and active[j] and dist[i, j] <= ri:
            count += 1
    rho = n_active / L ** dim
    if ri <= d_floor:
        out[0] = 0.0
    else:
        if dim == 2:
            vol = math.pi * ri * ri
        else:
            vol = 4.0 / 3.0 * math.pi * ri * ri * ri
        out[0] = count / (vol * rho)
    out[1] = ri / L
    out[2] = deg[i] / n_active


@njit(cache=True)
def agent_pass(order, u_eps, u_act, u_mag, eps,
               radii, active, A, deg, dist, factor,
               bank, mom1, mom2, steps, net_of, sizes, out_mode, adam_b1, adam_b2, adam_eps,
               train, lr, gamma, reward_scale, feat_scale,
               coeffs, max_rule, own_only,
               dr_scale, r_min, r_max, n_active, L, dim, d_floor,
               S, actions, rewards, S2, losses):
    """One sequential decision sweep over the agents in ``order``.

    Each agent observes, picks an epsilon-greedy action, moves its radius,
    receives minus the exact Hamiltonian change, and (if ``train[i]``) takes
    one Adam step toward the temporal-difference target.
    """
    n = radii.shape[0]
    row = np.empty(n, dtype=np.bool_)
    x = np.empty(3)
    x2 = np.empty(3)
    for idx in range(order.shape[0]):
        i = order[idx]
        if not active[i]:
            continue
        net = net_of[i]
        observe(i, radii, active, deg, dist, n_active, L, dim, d_floor, S[i])
        for k in range(3):
            x[k] = S[i, k] * feat_scale[k]
        if u_eps[i] < eps:
            a = 0 if u_act[i] < 0.5 else 1
        else:
            q = forward(bank[net], sizes, x, out_mode)
            a = 0 if q[0] >= q[1] else 1
        dr = dr_scale * u_mag[i]
        r_new = radii[i] + dr if a == 0 else radii[i] - dr
        if r_new < r_min:
            r_new = r_min
        elif r_new > r_max:
            r_new = r_max
        dh = delta_h_radius(i, r_new, radii, active, A, deg, dist, factor, coeffs,
                            max_rule, own_only, row)
        apply_row(i, r_new, radii, A, deg, row)
        rew = -dh
        observe(i, radii, active, deg, dist, n_active, L, dim, d_floor, S2[i])
        actions[i] = a
        rewards[i] = rew
        if train[i]:
            for k in range(3):
                x2[k] = S2[i, k] * feat_scale[k]
            q2 = forward(bank[net], sizes, x2, out_mode)
            best = q2[0] if q2[0] > q2[1] else q2[1]
            target = rew * reward_scale + gamma * best
            losses[i] = adam_train(bank[net], mom1[net], mom2[net], steps[net:net + 1],
                                   sizes, x, a, target, lr, out_mode,
                                   adam_b1, adam_b2, adam_eps)
