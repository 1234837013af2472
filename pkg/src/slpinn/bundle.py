"""Container for u and its input derivatives at one or many points."""

from dataclasses import dataclass, fields

from .errors import ContractViolation

# name -> (input axis, derivative order); axis 0 is x, axis 1 is t.
ENTRY_AXES = {
    "u": (0, 0),
    "u_x": (0, 1),
    "u_xx": (0, 2),
    "u_xxx": (0, 3),
    "u_t": (1, 1),
    "u_tt": (1, 2),
}
ENTRY_NAMES = tuple(ENTRY_AXES)


@dataclass(frozen=True)
class DerivativeBundle:
    """Network (or exact) solution value and derivatives.

    Fields left as ``None`` were not requested and are absent; reading one
    through :meth:`require` or indexing raises :class:`ContractViolation`.
    Values are scalars for a single point or arrays over a batch of points.
    """

    u: object = None
    u_x: object = None
    u_t: object = None
    u_xx: object = None
    u_tt: object = None
    u_xxx: object = None

    @property
    def present(self):
        return frozenset(f.name for f in fields(self) if getattr(self, f.name) is not None)

    def __getitem__(self, name):
        if name not in ENTRY_AXES:
            raise KeyError(name)
        value = getattr(self, name)
        if value is None:
            raise ContractViolation(f"bundle entry {name!r} was not computed")
        return value

    def require(self, names):
        missing = sorted(set(names) - self.present)
        if missing:
            raise ContractViolation(f"bundle is missing required entries {missing}")
