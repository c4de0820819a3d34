"""ODE compilation and integration for signed causal-loop models.

Each variable i evolves by

    dx_i/dt = sum over links j->i of sign(j->i) * gain(j->i) * f_j(x_j)
              - decay_i * x_i + drive_i(t)

with f_j either the identity or the saturating form x / (1 + x/K), and
levels clamped at zero after every step.  Explicit Euler and classical
RK4 are available; both run on the kernels backend (numba or numpy).

Time runs on the grid t_k = k * dt for k = 0 .. N with
N = floor(horizon / dt).  A shock lands on the first grid index at or
after its time; ``set`` replaces the level, ``add`` increments it, and
the stored row at that index shows the post-shock state.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from . import kernels
from .errors import NumericBlowupError, UnknownPolarityError, UnknownReferenceError
from .model import Model, Polarity
from .scenario import DEFAULT_DECAY, DEFAULT_GAIN, DEFAULT_INIT, Integrator, ScenarioSpec

_GRID_EPS = 1e-9


@dataclass(frozen=True, eq=False)
class CompiledSystem:
    model: Model
    spec: ScenarioSpec
    var_ids: tuple[int, ...]
    index: dict[int, int]
    n_steps: int
    dt: float
    src: np.ndarray
    dst: np.ndarray
    weight: np.ndarray  # polarity sign times gain, in (dst, src) order
    decay: np.ndarray
    drive_c: np.ndarray
    drive_r: np.ndarray
    form_kind: np.ndarray
    form_k: np.ndarray
    x0: np.ndarray
    # (grid index, variable position, mode, value) in application order
    shocks: tuple[tuple[int, int, str, float], ...] = ()

    def with_flipped_link(self, source: int, target: int) -> "CompiledSystem":
        """Test hook: copy with one link's weight negated."""
        pairs = list(zip(self.src, self.dst))
        pos = pairs.index((self.index[source], self.index[target]))
        w = self.weight.copy()
        w[pos] = -w[pos]
        return replace(self, weight=w)


@dataclass(frozen=True, eq=False)
class Trajectory:
    times: np.ndarray
    values: np.ndarray  # shape (len(times), len(var_ids))
    var_ids: tuple[int, ...]
    names: tuple[str, ...]

    def series(self, variable_id: int) -> np.ndarray:
        return self.values[:, self.var_ids.index(variable_id)]


def _check_refs(model: Model, spec: ScenarioSpec) -> None:
    ids = model.variables_by_id
    for vid in (
        list(spec.init)
        + list(spec.decay)
        + list(spec.forms)
        + list(spec.drives)
        + [s.variable for s in spec.shocks]
        + list(spec.outputs)
    ):
        if vid not in ids:
            raise UnknownReferenceError(f"variable {vid} is not in the model")
    for pair in spec.gains:
        if pair not in model.links_by_pair:
            raise UnknownReferenceError(f"link {pair[0]}->{pair[1]} is not in the model")


def compile(model: Model, spec: ScenarioSpec) -> CompiledSystem:
    """Bind a scenario to a model and lay the system out as arrays."""
    for link in model.links:
        if link.polarity is Polarity.UNKNOWN:
            raise UnknownPolarityError(
                f"link {link.source}->{link.target} has unknown polarity; "
                "run sign inference first"
            )
    _check_refs(model, spec)

    var_ids = tuple(v.id for v in model.variables)
    index = {vid: i for i, vid in enumerate(var_ids)}
    n = len(var_ids)

    links = sorted(model.links, key=lambda l: (index[l.target], index[l.source]))
    src = np.array([index[l.source] for l in links], dtype=np.int64)
    dst = np.array([index[l.target] for l in links], dtype=np.int64)
    weight = np.array(
        [
            (1.0 if l.polarity is Polarity.PLUS else -1.0)
            * spec.gains.get(l.pair, DEFAULT_GAIN)
            for l in links
        ],
        dtype=np.float64,
    )

    decay = np.full(n, DEFAULT_DECAY, dtype=np.float64)
    for vid, rate in spec.decay.items():
        decay[index[vid]] = rate
    drive_c = np.zeros(n, dtype=np.float64)
    drive_r = np.zeros(n, dtype=np.float64)
    for vid, drive in spec.drives.items():
        if drive.kind == "constant":
            drive_c[index[vid]] = drive.value
        else:
            drive_r[index[vid]] = drive.value
    form_kind = np.zeros(n, dtype=np.uint8)
    form_k = np.ones(n, dtype=np.float64)
    for vid, form in spec.forms.items():
        if form.kind == "sat":
            form_kind[index[vid]] = 1
            form_k[index[vid]] = form.k
    x0 = np.full(n, DEFAULT_INIT, dtype=np.float64)
    for vid, level in spec.init.items():
        x0[index[vid]] = level

    n_steps = int(math.floor(spec.horizon / spec.dt + _GRID_EPS))
    shocks = []
    for shock in spec.shocks:
        idx = int(math.ceil(shock.time / spec.dt - _GRID_EPS))
        shocks.append((min(idx, n_steps), index[shock.variable], shock.mode, shock.value))
    shocks.sort(key=lambda s: s[0])

    return CompiledSystem(
        model=model,
        spec=spec,
        var_ids=var_ids,
        index=index,
        n_steps=n_steps,
        dt=spec.dt,
        src=src,
        dst=dst,
        weight=weight,
        decay=decay,
        drive_c=drive_c,
        drive_r=drive_r,
        form_kind=form_kind,
        form_k=form_k,
        x0=x0,
        shocks=tuple(shocks),
    )


def integrate(system: CompiledSystem) -> Trajectory:
    """Run the compiled system over its whole grid."""
    n = len(system.var_ids)
    total = system.n_steps
    out = np.zeros((total + 1, n), dtype=np.float64)
    x = system.x0.copy()
    out[0] = x
    integ = 0 if system.spec.integrator is Integrator.EULER else 1

    # Split the run at shock indices; each shock edits state in place.
    cursor = 0
    pending = list(system.shocks) + [(total, -1, "", 0.0)]  # sentinel segment end
    for idx, pos, mode, value in pending:
        if idx > cursor:
            bad_step, bad_var = kernels.run_segment(
                x,
                out,
                cursor,
                idx - cursor,
                system.dt,
                integ,
                system.src,
                system.dst,
                system.weight,
                system.decay,
                system.drive_c,
                system.drive_r,
                system.form_kind,
                system.form_k,
            )
            if bad_step >= 0:
                raise NumericBlowupError(
                    bad_step * system.dt, system.var_ids[bad_var]
                )
            cursor = idx
        if pos >= 0:
            if mode == "set":
                x[pos] = value
            else:
                x[pos] = x[pos] + value
            if x[pos] < 0.0:
                x[pos] = 0.0
            out[cursor] = x

    times = np.arange(total + 1, dtype=np.float64) * system.dt
    names = tuple(system.model.variables_by_id[vid].name for vid in system.var_ids)
    return Trajectory(times=times, values=out, var_ids=system.var_ids, names=names)


def jacobian_sign_check(system: CompiledSystem, state: dict[int, float]) -> list[tuple[int, int, str, float]]:
    """Compare numeric partials with link polarities at an interior state.

    Returns (source, target, declared symbol, estimated partial) for
    every link whose finite-difference partial disagrees in sign.  Links
    with gain 0 exert no influence and are skipped.  The state must be
    strictly positive so the clamp boundary stays out of the stencil.
    """
    for vid in state:
        if vid not in system.index:
            raise UnknownReferenceError(f"variable {vid} is not in the model")
    x = np.array(
        [state.get(vid, DEFAULT_INIT) for vid in system.var_ids], dtype=np.float64
    )
    if np.any(x <= 0.0):
        raise ValueError("jacobian check needs a strictly positive state")

    fkind_s = system.form_kind[system.src]
    fk_s = system.form_k[system.src]
    n = len(system.var_ids)

    def deriv(xv):
        return kernels._deriv_numpy(
            xv, 0.0, system.src, system.dst, system.weight,
            system.decay, system.drive_c, system.drive_r, fkind_s, fk_s, n,
        )

    mismatches = []
    for e in range(len(system.src)):
        if system.weight[e] == 0.0:
            continue
        j = int(system.src[e])
        i = int(system.dst[e])
        h = 1e-6 * max(1.0, abs(x[j]))
        up = x.copy()
        up[j] += h
        down = x.copy()
        down[j] -= h
        partial = (deriv(up)[i] - deriv(down)[i]) / (2.0 * h)
        link = system.model.links_by_pair[(system.var_ids[j], system.var_ids[i])]
        expected = 1.0 if link.polarity is Polarity.PLUS else -1.0
        if math.copysign(1.0, partial) != expected or partial == 0.0:
            mismatches.append(
                (system.var_ids[j], system.var_ids[i], link.polarity.symbol, float(partial))
            )
    return mismatches


def export_csv(trajectory: Trajectory, outputs: list[int] | tuple[int, ...]) -> str:
    """Render selected series as CSV: header ``t,<id:name>,...``, %.9g floats."""
    cols = []
    for vid in outputs:
        if vid not in trajectory.var_ids:
            raise UnknownReferenceError(f"variable {vid} is not in the trajectory")
        cols.append(trajectory.var_ids.index(vid))
    parts = ["t"] + [f"{trajectory.var_ids[c]}:{trajectory.names[c]}" for c in cols]
    lines = [",".join(parts)]
    for k in range(len(trajectory.times)):
        row = [f"{trajectory.times[k]:.9g}"]
        row.extend(f"{trajectory.values[k, c]:.9g}" for c in cols)
        lines.append(",".join(row))
    return "\n".join(lines) + "\n"
