"""Exception taxonomy shared by all graftlab modules."""


class GraftLabError(Exception):
    """Base class for all errors raised by graftlab."""


# --- flat surfaces ---------------------------------------------------------

class NonInvolutivePairing(GraftLabError):
    """Edge pairing is not a fixed-point-free involution."""


class EdgeVectorMismatch(GraftLabError):
    """Paired edge vectors incompatible with the declared gluing kind."""


class BadConeAngle(GraftLabError):
    """A cone angle is not a positive integer multiple of pi."""


class NonPositiveArea(GraftLabError):
    """A polygon (or the whole surface) has non-positive area."""


class NonPeriodicDirection(GraftLabError):
    """Separatrix tracing exceeded its step budget; direction looks minimal."""


class NonGeodesicCurve(GraftLabError):
    """Curve has no straight (flat-geodesic) representative attached."""


# --- hyperbolic structures -------------------------------------------------

class DegenerateHexagon(GraftLabError):
    """Right-angled hexagon solve failed in working precision."""


class NonHyperbolicElement(GraftLabError):
    """Holonomy image has |trace| <= 2; no geodesic length."""


# --- grafting --------------------------------------------------------------

class NonDisjointCurves(GraftLabError):
    """Multicurve components are not pairwise disjoint."""


class NonPantsCurve(GraftLabError):
    """Curve is not a pants curve of the given decomposition."""


class MissingEnergyInput(GraftLabError):
    """An energy comparison was requested without the needed solver output."""


# --- dual trees ------------------------------------------------------------

class UnresolvedIntersection(GraftLabError):
    """No geodesic representative available to count crossings."""


# --- harmonic maps ---------------------------------------------------------

class MeshDegeneracy(GraftLabError):
    """Mesh construction would violate the aspect-ratio or alignment bounds."""


class InvalidTarget(GraftLabError):
    """Map value left the target space (e.g. nonpositive height in the plane)."""


class IterationBudgetExceeded(GraftLabError):
    """Energy minimization did not converge within the sweep budget."""


# --- elliptic layer / trajectory experiment --------------------------------

class PoleAt(GraftLabError):
    """Evaluation requested at a lattice point (a pole of the function)."""


class DegenerateConstants(GraftLabError):
    """The two defining constants of the meromorphic differential coincide."""


class StepBudgetExceeded(GraftLabError):
    """Trajectory tracing exceeded its step budget without resolving."""


class SingularStart(GraftLabError):
    """Trajectory started too close to a zero or pole."""


class UnresolvedClass(GraftLabError):
    """A trajectory could not be classified into a known curve class."""


class InconsistentDictionaries(GraftLabError):
    """Curve-system comparison attempted over incompatible probe data."""


# --- lab orchestration -----------------------------------------------------

class ConfigParseError(GraftLabError):
    """Experiment configuration failed validation."""


class MissingInput(GraftLabError):
    """A file referenced by the configuration does not exist."""


class ModuleFailure(GraftLabError):
    """A module-level error, wrapped with experiment context."""


class UnknownColumn(GraftLabError):
    """Plot specification references a column absent from the table."""
