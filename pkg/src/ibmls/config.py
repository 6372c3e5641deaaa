"""Line-oriented run configuration: `section.key = value` with fail-fast
validation.

Unknown keys, type mismatches, and range violations are reported with the
offending line number before any simulation work starts.
"""

from dataclasses import dataclass, field

from .errors import ConfigurationError
from .kernels import kernel_from_name

CASE_NAMES = (
    "taylor_green_cylinder",
    "stokes_first",
    "impulsive_cylinder",
    "oscillating_cylinder",
    "impulsive_plate",
)

COUPLING_MODES = ("standard", "mls", "mls_cvs", "mls_ncvs")
KERNEL_NAMES = (
    "peskin4", "spline5", "spline6", "spline2", "smoothed3", "rbf",
    "delta5new", "delta6new",
)
BC_NAMES = ("periodic", "dirichlet", "outflow", "free_slip")


def _string(allowed=None):
    def parse(raw):
        v = raw.strip().strip('"').strip("'")
        if allowed is not None and v not in allowed:
            raise ValueError(f"must be one of {', '.join(allowed)}")
        return v
    return parse


def _number(lo=None, hi=None, integer=False):
    def parse(raw):
        v = float(raw)
        if integer:
            if v != int(v):
                raise ValueError("must be an integer")
            v = int(v)
        if lo is not None and v < lo:
            raise ValueError(f"must be >= {lo}")
        if hi is not None and v > hi:
            raise ValueError(f"must be <= {hi}")
        return v
    return parse


def _number_list(n=None, integer=False):
    def parse(raw):
        parts = [p.strip() for p in raw.split(",") if p.strip()]
        if n is not None and len(parts) != n:
            raise ValueError(f"expected {n} comma-separated numbers")
        vals = [float(p) for p in parts]
        if integer:
            vals = [int(v) for v in vals]
        return tuple(vals)
    return parse


#: key -> (parser, default); default None means "unset"
SCHEMA = {
    "case": (_string(CASE_NAMES), None),
    "kernel": (_string(KERNEL_NAMES), "peskin4"),
    "seed": (_number(lo=0, integer=True), 0),
    "coupling.interp": (_string(COUPLING_MODES), "standard"),
    "coupling.spread": (_string(COUPLING_MODES), None),
    "coupling.gram_fallback": (_string(("error", "two_sided")), "error"),
    "grid.dims": (_number_list(integer=True), None),
    "grid.extent": (_number_list(), None),
    "grid.bc.xlo": (_string(BC_NAMES), None),
    "grid.bc.xhi": (_string(BC_NAMES), None),
    "grid.bc.ylo": (_string(BC_NAMES), None),
    "grid.bc.yhi": (_string(BC_NAMES), None),
    "grid.bc.zlo": (_string(BC_NAMES), None),
    "grid.bc.zhi": (_string(BC_NAMES), None),
    "fluid.rho": (_number(lo=1e-300), 1.0),
    "fluid.mu": (_number(lo=0.0), None),
    "fluid.re": (_number(lo=1e-300), None),
    "time.cfl": (_number(lo=1e-12, hi=10.0), 0.1),
    "time.dt_max": (_number(lo=1e-300), None),
    "time.t_end": (_number(lo=1e-300), None),
    "solver.rtol": (_number(lo=1e-16, hi=1.0), 1e-9),
    "solver.max_iter": (_number(lo=1, integer=True), None),
    "body.shape": (_string(("circle", "plate")), None),
    "body.center": (_number_list(), (0.0, 0.0)),
    "body.radius": (_number(lo=1e-300), 1.0),
    "body.motion": (
        _string(("static", "impulsive", "oscillation", "exact")), None),
    "body.orientation": (_string(("exterior", "interior", "both")),
                         "exterior"),
    "output.dir": (_string(), "."),
    "output.every": (_number(lo=0, integer=True), 0),
    "convergence.grids": (_number_list(integer=True), (64, 128, 256)),
}


@dataclass
class RunConfig:
    values: dict = field(default_factory=dict)

    def __getitem__(self, key):
        return self.values[key]

    def get(self, key, default=None):
        v = self.values.get(key)
        return default if v is None else v

    @property
    def case(self):
        return self.values["case"]

    def kernel_kind(self):
        return kernel_from_name(self.values["kernel"])


def parse_config(text):
    """Parse and validate configuration text into a RunConfig."""
    values = {k: default for k, (_, default) in SCHEMA.items()}
    seen = set()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigurationError(
                f"line {lineno}: expected 'key = value', got {raw.strip()!r}"
            )
        key, _, rhs = line.partition("=")
        key = key.strip()
        rhs = rhs.strip()
        if key not in SCHEMA:
            raise ConfigurationError(f"line {lineno}: unknown key {key!r}")
        if key in seen:
            raise ConfigurationError(f"line {lineno}: duplicate key {key!r}")
        seen.add(key)
        parser, _ = SCHEMA[key]
        try:
            values[key] = parser(rhs)
        except (ValueError, ConfigurationError) as exc:
            raise ConfigurationError(
                f"line {lineno}: invalid value for {key!r}: {exc}"
            ) from None
    if values["case"] is None:
        raise ConfigurationError("missing required key 'case'")
    if values["coupling.spread"] is None:
        values["coupling.spread"] = values["coupling.interp"]
    return RunConfig(values=values)


def load_config(path):
    with open(path) as fh:
        return parse_config(fh.read())
