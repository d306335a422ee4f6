"""Two-level system: pre-selection, post-selection and the measured observable."""

from dataclasses import dataclass, field

import numpy as np

from .errors import OrthogonalSelection

SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)
IDENTITY = np.eye(2, dtype=complex)

# below this |<f|i>|^2 the weak value is treated as undefined
ORTHOGONALITY_TOL = 1e-14


def _normalized(vector, name):
    v = np.asarray(vector, dtype=complex).reshape(-1)
    if v.shape != (2,):
        raise ValueError(f"{name} must have 2 components, got shape {v.shape}")
    norm = np.linalg.norm(v)
    if not np.isfinite(norm) or norm == 0:
        raise ValueError(f"{name} must be a nonzero finite vector")
    if abs(norm - 1.0) > 1e-12:
        raise ValueError(f"{name} must be normalized, |v| = {norm!r}")
    return v


@dataclass(frozen=True, eq=False)
class SelectionContext:
    """Pure pre-selected state |i>, post-selection onto |f>, observable A.

    Vectors are checked for normalization; use :meth:`from_vectors` to
    normalize arbitrary input.
    """

    pre_state: np.ndarray
    post_state: np.ndarray
    observable: np.ndarray = field(default_factory=lambda: SIGMA_X.copy())

    def __post_init__(self):
        object.__setattr__(self, "pre_state", _normalized(self.pre_state, "pre_state"))
        object.__setattr__(self, "post_state", _normalized(self.post_state, "post_state"))
        a = np.asarray(self.observable, dtype=complex)
        if a.shape != (2, 2):
            raise ValueError(f"observable must be 2x2, got shape {a.shape}")
        if not np.allclose(a, a.conj().T, rtol=0, atol=1e-12):
            raise ValueError("observable must be Hermitian")
        object.__setattr__(self, "observable", a)
        for arr in (self.pre_state, self.post_state, self.observable):
            arr.setflags(write=False)

    @classmethod
    def from_vectors(cls, pre, post, observable=SIGMA_X):
        pre = np.asarray(pre, dtype=complex)
        post = np.asarray(post, dtype=complex)
        return cls(pre / np.linalg.norm(pre), post / np.linalg.norm(post), observable)

    @classmethod
    def from_phi(cls, phi):
        """|i> = cos(phi)|0> + i sin(phi)|1>, |f> = |0>, A = sigma_x.

        Gives A_w = i tan(phi) and |<f|i>|^2 = cos^2(phi).
        """
        pre = np.array([np.cos(phi), 1j * np.sin(phi)])
        return cls(pre, np.array([1.0, 0.0]), SIGMA_X)

    @classmethod
    def from_weak_value(cls, weak_value, probability):
        """Construct states with A = sigma_x realizing a target weak value.

        ``probability`` is the zeroth-order post-selection probability
        |<f|i>|^2.  |f> = (cos t, sin t) is real and |i> = c|f> + d|f_perp>;
        requiring <f|sigma_x|i> = c * A_w fixes s = sin(2t) through

            s^2 - 2 P Re(A_w) s + P (1 + |A_w|^2) - 1 = 0.

        Raises ValueError when no qubit geometry realizes the pair.
        """
        w = complex(weak_value)
        prob = float(probability)
        if not 0 < prob <= 1:
            raise ValueError(f"probability must lie in (0, 1], got {prob!r}")
        b = -2.0 * prob * w.real
        c = prob * (1.0 + abs(w) ** 2) - 1.0
        disc = b * b - 4.0 * c
        if disc < 0:
            raise ValueError(f"no qubit states give A_w={w} with |<f|i>|^2={prob}")
        roots = [(-b + sgn * np.sqrt(disc)) / 2.0 for sgn in (1.0, -1.0)]
        # prefer the root furthest from |s| = 1 where cos(2t) vanishes
        roots = [r for r in roots if abs(r) < 1.0]
        if not roots:
            raise ValueError(f"no qubit states give A_w={w} with |<f|i>|^2={prob}")
        s = min(roots, key=abs)
        t = 0.5 * np.arcsin(s)
        f = np.array([np.cos(t), np.sin(t)], dtype=complex)
        f_perp = np.array([-np.sin(t), np.cos(t)], dtype=complex)
        amp = np.sqrt(prob)
        d = amp * (w - s) / np.cos(2.0 * t)
        pre = amp * f + d * f_perp
        return cls(pre / np.linalg.norm(pre), f, SIGMA_X)

    @property
    def post_projector(self) -> np.ndarray:
        return np.outer(self.post_state, self.post_state.conj())

    @property
    def system_state(self) -> np.ndarray:
        """rho_s = |i><i|."""
        return np.outer(self.pre_state, self.pre_state.conj())

    @property
    def is_involutive(self) -> bool:
        a = self.observable
        return bool(np.allclose(a @ a, IDENTITY, rtol=0, atol=1e-12))

    def expectation(self, power=1) -> float:
        """<i|A^power|i>."""
        a = np.linalg.matrix_power(self.observable, power)
        return float(np.real(self.pre_state.conj() @ a @ self.pre_state))

    def transition_amplitude(self) -> complex:
        """<f|A|i>."""
        return complex(self.post_state.conj() @ self.observable @ self.pre_state)


def postselection_overlap(ctx: SelectionContext) -> float:
    """Tr[Pi_f rho_s] = |<f|i>|^2, the zeroth-order post-selection probability."""
    return float(np.real(np.trace(ctx.post_projector @ ctx.system_state)))


def _checked_overlap(ctx):
    overlap = postselection_overlap(ctx)
    if overlap < ORTHOGONALITY_TOL:
        raise OrthogonalSelection(
            f"|<f|i>|^2 = {overlap:.3e} is below {ORTHOGONALITY_TOL:g}; weak value undefined"
        )
    return overlap


def weak_value(ctx: SelectionContext) -> complex:
    """A_w = Tr[Pi_f A rho_s] / Tr[Pi_f rho_s]."""
    overlap = _checked_overlap(ctx)
    return complex(np.trace(ctx.post_projector @ ctx.observable @ ctx.system_state)) / overlap


def weak_value_conjugate(ctx: SelectionContext) -> complex:
    """A_w^* from its own trace form, Tr[Pi_f rho_s A] / Tr[Pi_f rho_s]."""
    overlap = _checked_overlap(ctx)
    return complex(np.trace(ctx.post_projector @ ctx.system_state @ ctx.observable)) / overlap


def weak_value_abs_sq(ctx: SelectionContext) -> float:
    """|A_w|^2 from the trace form Tr[Pi_f A rho_s A] / Tr[Pi_f rho_s]."""
    overlap = _checked_overlap(ctx)
    a = ctx.observable
    num = np.trace(ctx.post_projector @ a @ ctx.system_state @ a)
    return float(np.real(num)) / overlap
