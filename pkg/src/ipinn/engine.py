"""Exact loss gradients by reverse accumulation over the jet forward pass.

The forward pass propagates second-order jets (value, per-direction first and
second derivative channels) through the shared MLP for every collocation
point; the recorded layer primitives are then walked backwards, pushing
adjoints of the loss with respect to the output value, gradient, and
Laplacian through each activation and affine record to accumulate exact
derivatives for every weight, bias, and (in adai mode) per-subdomain slope.
Because the activation's second-derivative channel contains sigma''(z), its
reverse rule needs sigma''' from the activation catalog.

Evaluation is chunked over collocation points: a first pass computes
(u, grad u, lap u) for every row, the residual seeds are assembled globally,
and a second pass redoes the forward per chunk with locals kept and
immediately reverses it. Chunk-sized buffers keep the working set
cache-resident, and all elementwise arithmetic runs on flat contiguous views
(numpy's vectorized transcendental kernels only engage on 1-D contiguous
data; per-row broadcasts are an order of magnitude slower, so the scale
column is pre-expanded once per iteration). All reductions run in a fixed
chunk order, so results are deterministic. The workspace is owned by one
evaluation loop and never shared concurrently.
"""

from __future__ import annotations

import numpy as np

from ipinn.activations import act_eval3
from ipinn.loss import EvalPlan, LossBreakdown, LossWeights, ResidualCache, build_plan, loss_terms
from ipinn.network import MODE_ADAI, Architecture, MLPParams
from ipinn.problems import ProblemSpec
from ipinn.sampling import Batch

# one chunk covering every row is fastest on current hardware; smaller chunks
# trade a duplicated forward pass for cache residency and are kept selectable
DEFAULT_CHUNK = 1 << 20


def _seed_adjoints(plan: EvalPlan, cache: ResidualCache, weights: LossWeights):
    """d total / d (u, grad, lap) per row, from the squared-mean residual terms."""
    n, d = plan.X.shape
    u_bar = np.zeros(n)
    grad_bar = np.zeros((n, d))
    lap_bar = np.zeros(n)
    for grp, r in zip(plan.interior, cache.interior):
        lap_bar[grp.rows] += (2.0 / r.shape[0]) * grp.kappa * r
    for grp, r in zip(plan.dirichlet, cache.dirichlet):
        u_bar[grp.rows] += weights.alpha_bc_d * (2.0 / r.shape[0]) * r
    for grp, r in zip(plan.neumann, cache.neumann):
        c = weights.alpha_bc_n * (2.0 / r.shape[0]) * grp.kappa * r
        grad_bar[grp.rows] += c[:, None] * grp.normals
    for grp, r_u, r_f in zip(plan.interfaces, cache.iface_u, cache.iface_flux):
        c_u = weights.alpha_int * (2.0 / r_u.shape[0]) * r_u
        u_bar[grp.rows_inner] += c_u
        u_bar[grp.rows_outer] -= c_u
        c_f = weights.alpha_int * (2.0 / r_f.shape[0]) * r_f
        grad_bar[grp.rows_inner] += (grp.kappa_inner * c_f)[:, None] * grp.normals
        grad_bar[grp.rows_outer] -= (grp.kappa_outer * c_f)[:, None] * grp.normals
    return u_bar, grad_bar, lap_bar


class GradEngine:
    """Reusable chunked forward/reverse workspace for one plan and architecture."""

    def __init__(self, plan: EvalPlan, arch: Architecture, chunk: int = DEFAULT_CHUNK):
        self.plan = plan
        self.arch = arch
        n, d = plan.X.shape
        self.n, self.d = n, d
        self.adai = arch.mode == MODE_ADAI
        self.widths = list(arch.hidden_sizes)
        self.n_hidden = len(self.widths)
        self.chunk = int(min(chunk, n))
        if not self.adai:
            kind_of_row = np.empty(n, dtype=object)
            for m, start, stop in plan.blocks:
                kind_of_row[start:stop] = arch.activations[m - 1]
        self.chunks = []
        for i0 in range(0, n, self.chunk):
            i1 = min(i0 + self.chunk, n)
            if self.adai:
                runs = [(arch.activation, 0, i1 - i0)]
            else:
                runs = []
                j = i0
                while j < i1:
                    k = j
                    while k < i1 and kind_of_row[k] is kind_of_row[j]:
                        k += 1
                    runs.append((kind_of_row[j], j - i0, k - i0))
                    j = k
            self.chunks.append((i0, i1, runs))
        self.sub_idx = plan.row_subdomain - 1
        c = self.chunk
        self._templates = {}
        # per-layer chunk buffers (locals for the reverse pass)
        self._buf = [
            {
                name: np.empty((2 * d * c * w,) if name in ("at", "tan") else (c * w,))
                for name in ("av", "at", "f0", "f1", "f2", "f3", "c1", "c2", "tan")
            }
            for w in self.widths
        ]
        max_w = max(self.widths)
        self._t1 = np.empty(c * max_w)
        self._t2 = np.empty(c * max_w)
        self._t3 = np.empty(c * max_w)
        self._t4 = np.empty(c * max_w)
        self._vb = np.empty(2 * d * c * max_w)
        self._vb2 = np.empty(2 * d * c * max_w)
        self._sexp = {w: np.empty(n * w) for w in set(self.widths)}
        self._s2exp = {w: np.empty(n * w) for w in set(self.widths)}

    # -- helpers ----------------------------------------------------------

    def _template(self, size):
        """Tangent seeds: unit first-derivative blocks, zero second derivatives."""
        t = self._templates.get(size)
        if t is None:
            t = np.zeros((2 * self.d * size, self.d))
            for k in range(self.d):
                t[k * size : (k + 1) * size, k] = 1.0
            self._templates[size] = t
        return t

    def _expand_scales(self, params):
        """Per-row activation scale, pre-expanded to flat (rows * width) arrays."""
        if self.adai:
            s = (self.arch.scale_n * params.slopes)[self.sub_idx]
        else:
            s = np.ones(self.n)
        for w, buf in self._sexp.items():
            np.multiply(s[:, None], np.ones(w), out=buf.reshape(self.n, w))
            np.multiply(buf, buf, out=self._s2exp[w])
        return s

    # -- chunk forward: fills per-layer locals, returns (u, grad, lap) -----

    def _chunk_forward(self, params, i0, i1, runs, keep_f3):
        d = self.d
        c = i1 - i0
        val = self.plan.X[i0:i1]
        tan = self._template(c)
        for layer in range(self.n_hidden):
            wgt, b = params.weights[layer], params.biases[layer]
            w = self.widths[layer]
            buf = self._buf[layer]
            av = buf["av"][: c * w]
            at = buf["at"][: 2 * d * c * w]
            av2 = av.reshape(c, w)
            np.matmul(val, wgt.T, out=av2)
            av2 += b
            np.matmul(tan, wgt.T, out=at.reshape(2 * d * c, w))
            s_f = self._sexp[w][i0 * w : i1 * w]
            s2_f = self._s2exp[w][i0 * w : i1 * w]
            z = self._t1[: c * w]
            np.multiply(s_f, av, out=z)
            f0, f1, f2, f3 = (buf[nm][: c * w] for nm in ("f0", "f1", "f2", "f3"))
            for kind, r0, r1 in runs:
                sl = slice(r0 * w, r1 * w)
                a0, a1, a2, a3 = act_eval3(kind, z[sl])
                f0[sl] = a0
                f1[sl] = a1
                f2[sl] = a2
                if keep_f3:
                    f3[sl] = a3
            c1, c2 = buf["c1"][: c * w], buf["c2"][: c * w]
            np.multiply(s_f, f1, out=c1)
            np.multiply(s2_f, f2, out=c2)
            out = buf["tan"][: 2 * d * c * w]
            g2 = self._t2[: c * w]
            cw = c * w
            for k in range(d):
                g = at[k * cw : (k + 1) * cw]
                h = at[(d + k) * cw : (d + k + 1) * cw]
                o1 = out[k * cw : (k + 1) * cw]
                o2 = out[(d + k) * cw : (d + k + 1) * cw]
                np.multiply(g, g, out=g2)
                g2 *= c2
                np.multiply(c1, h, out=o2)
                o2 += g2
                np.multiply(c1, g, out=o1)
            val = f0.reshape(c, w)
            tan = out.reshape(2 * d * c, w)
        w_out, b_out = params.weights[-1], params.biases[-1]
        u = (val @ w_out.T + b_out)[:, 0]
        t_out = (tan @ w_out.T)[:, 0]
        grad = t_out[: d * c].reshape(d, c).T
        lap = t_out[d * c :].reshape(d, c).sum(axis=0)
        return u, grad, lap

    # -- chunk reverse over the locals left by the latest _chunk_forward ----

    def _chunk_reverse(self, params, i0, i1, u_bar, grad_bar, lap_bar, w_bars, b_bars, s_rows):
        d = self.d
        c = i1 - i0
        w_last = params.weights[-1]
        u_b = u_bar[i0:i1]
        tan_bar_flat = np.concatenate(
            [grad_bar[i0:i1, k] for k in range(d)] + [lap_bar[i0:i1]] * d
        )
        w_top = self.widths[-1]
        val_last = self._buf[-1]["f0"][: c * w_top].reshape(c, w_top)
        tan_last = self._buf[-1]["tan"][: 2 * d * c * w_top].reshape(2 * d * c, w_top)
        w_bars[-1] += u_b @ val_last + tan_bar_flat @ tan_last
        b_bars[-1][0] += u_b.sum()
        val_bar = u_b[:, None] * w_last
        tan_bar = self._vb[: 2 * d * c * w_top]
        np.multiply(tan_bar_flat[:, None], w_last, out=tan_bar.reshape(2 * d * c, w_top))

        for layer in range(self.n_hidden - 1, -1, -1):
            buf = self._buf[layer]
            w = self.widths[layer]
            cw = c * w
            av = buf["av"][:cw]
            at = buf["at"][: 2 * d * cw]
            f1, f2, f3 = buf["f1"][:cw], buf["f2"][:cw], buf["f3"][:cw]
            c1, c2 = buf["c1"][:cw], buf["c2"][:cw]
            s_f = self._sexp[w][i0 * w : i1 * w]
            s2_f = self._s2exp[w][i0 * w : i1 * w]
            t1 = self._t1[:cw]
            t2 = self._t2[:cw]
            t3 = self._t3[:cw]
            vb_flat = val_bar.reshape(-1)
            v_bar = vb_flat * c1
            if self.adai:
                s_elem = vb_flat * f1
                s_elem *= av
            c3 = np.multiply(s2_f, f3, out=self._t4[:cw])  # becomes s^3 f3
            c3 *= s_f
            sf2v = np.multiply(s_f, f2, out=t2)
            sf2v *= av  # s f2 v
            gt_bar = self._vb2[: 2 * d * cw]
            tb_flat = tan_bar  # flat view over (2dc, w)
            for k in range(d):
                g = at[k * cw : (k + 1) * cw]
                h = at[(d + k) * cw : (d + k + 1) * cw]
                o1 = tb_flat[k * cw : (k + 1) * cw]
                o2 = tb_flat[(d + k) * cw : (d + k + 1) * cw]
                np.multiply(c2, g, out=t3)
                t3 *= o1
                v_bar += t3
                np.multiply(c3, g, out=t3)
                t3 *= g
                np.multiply(c2, h, out=t1)
                t3 += t1
                t3 *= o2
                v_bar += t3
                if self.adai:
                    # d(outputs)/d s with z = s v: d1 and d2 channels
                    np.add(f1, sf2v, out=t3)  # e = f1 + s f2 v
                    np.multiply(t3, h, out=t1)
                    t1 *= o2
                    t3 *= g
                    t3 *= o1
                    s_elem += t3
                    s_elem += t1
                    np.multiply(s2_f, f3, out=t3)
                    t3 *= av
                    np.multiply(s_f, f2, out=t1)
                    t1 *= 2.0
                    t3 += t1
                    t3 *= g
                    t3 *= g
                    t3 *= o2
                    s_elem += t3
                # adjoints of the tangent inputs (g, h)
                gk = gt_bar[k * cw : (k + 1) * cw]
                np.multiply(c2, g, out=t3)
                t3 *= 2.0
                t3 *= o2
                np.multiply(c1, o1, out=gk)
                gk += t3
                np.multiply(c1, o2, out=gt_bar[(d + k) * cw : (d + k + 1) * cw])
            if self.adai:
                s_rows[i0:i1] += s_elem.reshape(c, w).sum(axis=1)
            wgt = params.weights[layer]
            if layer > 0:
                w_prev = self.widths[layer - 1]
                val_in = self._buf[layer - 1]["f0"][: c * w_prev].reshape(c, w_prev)
                tan_in = self._buf[layer - 1]["tan"][: 2 * d * c * w_prev].reshape(2 * d * c, w_prev)
            else:
                val_in = self.plan.X[i0:i1]
                tan_in = self._template(c)
            v_bar2 = v_bar.reshape(c, w)
            gt2 = gt_bar.reshape(2 * d * c, w)
            w_bars[layer] += v_bar2.T @ val_in
            w_bars[layer] += gt2.T @ tan_in
            b_bars[layer] += v_bar2.sum(axis=0)
            if layer > 0:
                val_bar = v_bar2 @ wgt
                nxt = self._vb[: 2 * d * c * w_prev]
                np.matmul(gt2, wgt, out=nxt.reshape(2 * d * c, w_prev))
                tan_bar = nxt

    def loss_and_grad(self, params: MLPParams, weights: LossWeights):
        self._expand_scales(params)
        single = len(self.chunks) == 1
        if single:
            i0, i1, runs = self.chunks[0]
            u, grad, lap = self._chunk_forward(params, i0, i1, runs, keep_f3=True)
        else:
            u = np.empty(self.n)
            grad = np.empty((self.n, self.d))
            lap = np.empty(self.n)
            for i0, i1, runs in self.chunks:
                u[i0:i1], grad[i0:i1], lap[i0:i1] = self._chunk_forward(
                    params, i0, i1, runs, keep_f3=False
                )
        breakdown, cache = loss_terms(u, grad, lap, self.plan, weights, compensated=False)
        u_bar, grad_bar, lap_bar = _seed_adjoints(self.plan, cache, weights)
        sizes = self.arch.layer_sizes
        w_bars = [np.zeros((o, i)) for i, o in zip(sizes[:-1], sizes[1:])]
        b_bars = [np.zeros(o) for o in sizes[1:]]
        s_rows = np.zeros(self.n) if self.adai else None
        for i0, i1, runs in self.chunks:
            if not single:
                self._chunk_forward(params, i0, i1, runs, keep_f3=True)
            self._chunk_reverse(params, i0, i1, u_bar, grad_bar, lap_bar, w_bars, b_bars, s_rows)
        parts = []
        for wb, bb in zip(w_bars, b_bars):
            parts.append(wb.ravel())
            parts.append(bb)
        if self.adai:
            slope_bar = np.zeros(self.arch.num_subdomains)
            for m, start, stop in self.plan.blocks:
                slope_bar[m - 1] = self.arch.scale_n * s_rows[start:stop].sum()
            parts.append(slope_bar)
        return breakdown, np.concatenate(parts)


def loss_and_grad_plan(
    params: MLPParams,
    arch: Architecture,
    plan: EvalPlan,
    weights: LossWeights,
) -> tuple[LossBreakdown, np.ndarray]:
    """Loss breakdown plus d total / d theta (and d/d a_m in adai mode), flat."""
    return GradEngine(plan, arch).loss_and_grad(params, weights)


def loss_and_grad(
    params: MLPParams,
    arch: Architecture,
    batch: Batch,
    problem: ProblemSpec,
    weights: LossWeights,
) -> tuple[LossBreakdown, np.ndarray]:
    """Convenience wrapper that builds the evaluation plan on the fly."""
    return loss_and_grad_plan(params, arch, build_plan(problem, batch), weights)
