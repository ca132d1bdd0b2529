"""Damage-function library.

Base functions: per-cell quadratic (Kompas-style, K), regional quadratics
(RICE2010-style R, Kalkuhl-Wenz-style KW), global quadratic (DICE2016R-style
d), and a catastrophic global function (Weitzman-style w). Extensions:
urban-heat-island temperature (U), persistence carry-forward (P), rescaling
of regional projections to a global target (_d), and downscaling of global
damages by regional-grid loss weights (_w).
"""

from dataclasses import dataclass, field, replace

import numpy as np

from .climate import ClimateField
from .grid import CellField, GridSpec, RegionMap


class DamageError(ValueError):
    pass


# variant id -> (base function, uhi flag, persistence flag, update target,
#                downscale weights source)
VARIANTS = {
    "K":     ("kompas", False, False, None, None),
    "KU":    ("kompas", True,  False, None, None),
    "R":     ("rice",   False, False, None, None),
    "RU":    ("rice",   True,  False, None, None),
    "RPU":   ("rice",   True,  True,  None, None),
    "R_d":   ("rice",   False, False, "dice", None),
    "RU_d":  ("rice",   True,  False, "dice", None),
    "RPU_d": ("rice",   True,  True,  "dice", None),
    "KW":    ("kw",     False, False, None, None),
    "KWU":   ("kw",     True,  False, None, None),
    "w":     ("weitzman", False, False, None, "R"),
    "RU_w":  ("weitzman", True,  False, None, "RU"),
    "RPU_w": ("weitzman", True,  True,  None, "RPU"),
}

# shorthand used in reports, e.g. "RUd" for "RU_d"
_ALIASES = {vid.replace("_", ""): vid for vid in VARIANTS}


def canonical_variant(vid: str) -> str:
    if vid in VARIANTS:
        return vid
    if vid in _ALIASES:
        return _ALIASES[vid]
    raise DamageError(f"unknown variant {vid!r}; valid ids: {sorted(VARIANTS)}")


@dataclass(frozen=True)
class DamageSpec:
    """A damage-function variant plus its extension knobs."""

    variant: str
    rho: float = 0.5  # persistence carry-forward fraction

    def __post_init__(self):
        object.__setattr__(self, "variant", canonical_variant(self.variant))
        if not (0.0 <= self.rho <= 1.0):
            raise DamageError("rho must lie in [0, 1]")

    @property
    def base(self) -> str:
        return VARIANTS[self.variant][0]

    @property
    def uhi(self) -> bool:
        return VARIANTS[self.variant][1]

    @property
    def persistence(self) -> bool:
        return VARIANTS[self.variant][2]

    @property
    def update_target(self):
        return VARIANTS[self.variant][3]

    @property
    def downscale_weights(self):
        return VARIANTS[self.variant][4]


@dataclass(frozen=True)
class DamageParams:
    """Calibration coefficients for every base function."""

    dice_a: float = 0.00236                      # fraction per degC^2
    rice: dict = field(default_factory=dict)     # region -> (theta1, theta2)
    kw: dict = field(default_factory=dict)       # region -> (b1, b2)
    kompas: np.ndarray = None                    # per-cell kappa
    weitzman: tuple = (20.46, 6.081, 6.754)      # (c1, c2, p)


@dataclass(frozen=True)
class LossField:
    """Per-cell annual loss fraction and dollar loss."""

    grid: GridSpec
    years: np.ndarray
    fraction: np.ndarray  # (n_years, n_cells), in [0, 1]
    value: np.ndarray     # (n_years, n_cells), US$2005

    def __post_init__(self):
        if np.any(self.fraction < 0) or np.any(self.fraction > 1 + 1e-12):
            raise DamageError("loss fraction outside [0, 1]")


# --- base damage functions -------------------------------------------------

def dice2016(temp, a: float = 0.00236):
    """Global quadratic loss fraction a * T^2."""
    temp = np.asarray(temp, dtype=float)
    out = np.clip(a * temp * temp, 0.0, 1.0)
    return out if out.ndim else float(out)


def rice_regional(temp, region: str, params: DamageParams):
    """Regional quadratic theta1*T + theta2*T^2, clamped to [0, 1]."""
    if region not in params.rice:
        raise DamageError(f"no RICE coefficients for region {region!r}")
    t1, t2 = params.rice[region]
    temp = np.asarray(temp, dtype=float)
    out = np.clip(t1 * temp + t2 * temp * temp, 0.0, 1.0)
    return out if out.ndim else float(out)


def kw_panel(temp, region: str, params: DamageParams):
    """Regional panel-econometric quadratic b1*T + b2*T^2, clamped to [0, 1]."""
    if region not in params.kw:
        raise DamageError(f"no KW coefficients for region {region!r}")
    b1, b2 = params.kw[region]
    temp = np.asarray(temp, dtype=float)
    out = np.clip(b1 * temp + b2 * temp * temp, 0.0, 1.0)
    return out if out.ndim else float(out)


def kompas_cell(temp, cell: int, params: DamageParams):
    """Per-cell quadratic kappa_i * T^2, clamped to [0, 1]."""
    if params.kompas is None or cell >= len(params.kompas):
        raise DamageError(f"missing per-cell coefficient for cell {cell}")
    temp = np.asarray(temp, dtype=float)
    out = np.clip(params.kompas[cell] * temp * temp, 0.0, 1.0)
    return out if out.ndim else float(out)


def weitzman_global(temp, params: DamageParams = DamageParams()):
    """Catastrophic global loss fraction 1 - 1/(1 + (T/c1)^2 + (T/c2)^p)."""
    c1, c2, p = params.weitzman
    temp = np.asarray(temp, dtype=float)
    t = np.maximum(temp, 0.0)
    out = 1.0 - 1.0 / (1.0 + (t / c1) ** 2 + (t / c2) ** p)
    return out if out.ndim else float(out)


# --- extensions ------------------------------------------------------------

def effective_temperature(delta_t, uhi, uhi_flag: bool):
    """Cell temperature seen by the damage function: +UHI when flagged."""
    return delta_t + uhi if uhi_flag else delta_t


def apply_persistence(fractions: np.ndarray, rho: float) -> np.ndarray:
    """Carry a fraction rho of prior-year damages forward as lost capacity.

    D_t = min(1, d_t + rho * D_{t-1}), with D = 0 before the first year.
    Works on (n_years,) or (n_years, n_cells) arrays along axis 0.
    """
    if not (0.0 <= rho <= 1.0):
        raise DamageError("rho must lie in [0, 1]")
    fractions = np.asarray(fractions, dtype=float)
    out = np.empty_like(fractions)
    prev = np.zeros(fractions.shape[1:] if fractions.ndim > 1 else ())
    for t in range(fractions.shape[0]):
        prev = np.minimum(1.0, fractions[t] + rho * prev)
        out[t] = prev
    return out


def _cap_distribute(target_dollars: float, weights: np.ndarray,
                    gdp: np.ndarray, tol: float = 1e-9) -> np.ndarray:
    """Loss fractions proportional to `weights` whose dollar total equals
    `target_dollars`, with per-cell fractions capped at 1 and the residual
    redistributed over uncapped cells until the total converges.
    """
    weights = np.asarray(weights, dtype=float)
    gdp = np.asarray(gdp, dtype=float)
    if np.any(weights < 0):
        raise DamageError("negative weights")
    frac = np.zeros_like(gdp)
    if target_dollars <= 0:
        return frac
    capped = np.zeros(len(gdp), dtype=bool)
    total_gdp = gdp.sum()
    if target_dollars > total_gdp * (1 + tol):
        # global fraction above 1 is not representable; saturate
        return np.where(gdp > 0, 1.0, 0.0)
    for _ in range(len(gdp) + 1):
        remaining = target_dollars - gdp[capped].sum()
        denom = np.sum(weights[~capped] * gdp[~capped])
        if denom <= 0:
            raise DamageError("zero losses with positive target")
        lam = remaining / denom
        frac = np.where(capped, 1.0, lam * weights)
        over = (frac > 1.0) & ~capped
        if not np.any(over):
            break
        capped |= over
    return np.clip(frac, 0.0, 1.0)


def update_rescale(fraction: np.ndarray, global_target: float,
                   gdp: np.ndarray) -> np.ndarray:
    """Rescale cell loss fractions so the global loss fraction equals
    `global_target` exactly, clamping at 1 with proportional redistribution."""
    gdp = np.asarray(gdp, dtype=float)
    total_gdp = gdp.sum()
    if total_gdp <= 0:
        raise DamageError("zero global GDP")
    if global_target == 0:
        return np.zeros_like(np.asarray(fraction, dtype=float))
    return _cap_distribute(global_target * total_gdp, np.asarray(fraction), gdp)


def downscale_global(global_loss: float, weights: np.ndarray,
                     gdp: np.ndarray) -> np.ndarray:
    """Distribute a global dollar loss over cells proportional to `weights`,
    returning per-cell loss fractions of `gdp` (capped at 1)."""
    weights = np.asarray(weights, dtype=float)
    if global_loss < 0:
        raise DamageError("negative global loss")
    if global_loss == 0:
        return np.zeros_like(np.asarray(gdp, dtype=float))
    if weights.sum() <= 0:
        raise DamageError("all-zero downscaling weights")
    gdp = np.asarray(gdp, dtype=float)
    # weights are dollar losses; convert to fraction weights per unit GDP
    safe_gdp = np.where(gdp > 0, gdp, 1.0)
    frac_weights = np.where(gdp > 0, weights / safe_gdp, 0.0)
    return _cap_distribute(global_loss, frac_weights, gdp)


def regional_to_grid(regional_fraction: float, response: np.ndarray,
                     gdp: np.ndarray) -> np.ndarray:
    """Cell fractions proportional to the per-cell response such that the
    GDP-weighted regional mean equals `regional_fraction`."""
    gdp = np.asarray(gdp, dtype=float)
    response = np.asarray(response, dtype=float)
    total_gdp = gdp.sum()
    if total_gdp <= 0:
        raise DamageError("zero regional GDP")
    if regional_fraction == 0:
        return np.zeros_like(response)
    if np.sum(response * gdp) <= 0:
        # degenerate response pattern: fall back to a uniform fraction
        return np.full_like(response, min(regional_fraction, 1.0))
    return _cap_distribute(regional_fraction * total_gdp, response, gdp)


# --- composition -----------------------------------------------------------

def _regional_grid_series(func, coeff_params: DamageParams, teff: np.ndarray,
                          gdp: np.ndarray, rmap: RegionMap) -> np.ndarray:
    """Grid loss-fraction series for a regional quadratic, regionally
    consistent each year: the GDP-weighted regional mean matches the
    regional function evaluated at the GDP-weighted regional temperature."""
    n_years, n_cells = teff.shape
    frac = np.zeros((n_years, n_cells))
    land = rmap.land
    for region in np.unique(rmap.region[land]):
        cells = np.flatnonzero(land & (rmap.region == region))
        for t in range(n_years):
            g = gdp[t, cells]
            total = g.sum()
            if total <= 0:
                continue
            t_mean = float(np.sum(g * teff[t, cells]) / total)
            target = func(t_mean, str(region), coeff_params)
            response = func(teff[t, cells], str(region), coeff_params)
            frac[t, cells] = regional_to_grid(target, response, g)
    return frac


def evaluate_series(spec: DamageSpec, climate: ClimateField, gdp: np.ndarray,
                    global_dt: np.ndarray, rmap: RegionMap,
                    params: DamageParams) -> LossField:
    """Loss fractions and dollar losses for a variant over the full horizon.

    `gdp` is (n_years, n_cells); `global_dt` is (n_years,). Water cells and
    zero-GDP cells always carry zero dollar losses.
    """
    n_years, n_cells = climate.delta_t.shape
    if gdp.shape != (n_years, n_cells):
        raise DamageError("gdp shape does not match climate field")
    teff = effective_temperature(climate.delta_t, climate.uhi, spec.uhi)
    land = rmap.land

    if spec.base == "kompas":
        if params.kompas is None:
            raise DamageError("per-cell kappa table not loaded")
        frac = np.clip(params.kompas[None, :] * teff * teff, 0.0, 1.0)
    elif spec.base == "rice":
        frac = _regional_grid_series(rice_regional, params, teff, gdp, rmap)
    elif spec.base == "kw":
        frac = _regional_grid_series(kw_panel, params, teff, gdp, rmap)
    elif spec.base == "weitzman":
        weights_spec = DamageSpec(spec.downscale_weights, rho=spec.rho)
        weights_field = evaluate_series(weights_spec, climate, gdp, global_dt,
                                        rmap, params)
        frac = np.zeros((n_years, n_cells))
        for t in range(n_years):
            total_gdp = gdp[t, land].sum()
            global_loss = weitzman_global(global_dt[t], params) * total_gdp
            w = weights_field.value[t].copy()
            if w.sum() <= 0:
                # no spatial signal yet; spread by GDP
                w = gdp[t] * land
            if w.sum() > 0:
                frac[t] = downscale_global(global_loss, w, gdp[t])
        frac[:, ~land] = 0.0
        value = frac * gdp
        return LossField(grid=climate.grid, years=climate.years,
                         fraction=frac, value=value)
    else:
        raise DamageError(f"unknown base function {spec.base!r}")

    if spec.persistence:
        frac = apply_persistence(frac, spec.rho)

    if spec.update_target == "dice":
        target = dice2016(global_dt, params.dice_a)
        if spec.persistence:
            target = apply_persistence(target, spec.rho)
        for t in range(n_years):
            g = np.where(land, gdp[t], 0.0)
            if g.sum() <= 0:
                continue
            if frac[t, land].max() <= 0 and target[t] > 0:
                # no regional signal to scale; fall back to uniform
                frac[t] = np.where(land, min(float(target[t]), 1.0), 0.0)
            else:
                frac[t] = update_rescale(np.where(land, frac[t], 0.0),
                                         float(target[t]), g)

    frac[:, ~land] = 0.0
    value = frac * gdp
    return LossField(grid=climate.grid, years=climate.years,
                     fraction=frac, value=value)


def evaluate(spec: DamageSpec, climate: ClimateField, gdp: np.ndarray,
             global_dt: np.ndarray, rmap: RegionMap, params: DamageParams,
             year: int) -> tuple[np.ndarray, np.ndarray]:
    """Single-year (fraction, value) slices of the full-horizon evaluation.

    Persistence and update extensions depend on history, so the whole
    series is composed first.
    """
    years = np.asarray(climate.years)
    t = int(np.flatnonzero(years == year)[0]) if year in years else None
    if t is None:
        raise DamageError(f"year {year} outside horizon")
    result = evaluate_series(spec, climate, gdp, global_dt, rmap, params)
    return result.fraction[t], result.value[t]


# --- calibration loaders ---------------------------------------------------

def load_damage_params(dice_path, rice_path, kw_path, kompas_path,
                       weitzman_path, grid: GridSpec) -> DamageParams:
    dice_a = float(_kv(dice_path).get("a", 0.00236))
    rice = {}
    for row in np.atleast_1d(np.genfromtxt(rice_path, delimiter=",", names=True,
                                           dtype=None, encoding="utf-8")):
        rice[str(row["region"])] = (float(row["theta1"]), float(row["theta2"]))
    kw = {}
    for row in np.atleast_1d(np.genfromtxt(kw_path, delimiter=",", names=True,
                                           dtype=None, encoding="utf-8")):
        kw[str(row["region"])] = (float(row["b1"]), float(row["b2"]))
    rows = np.genfromtxt(kompas_path, delimiter=",", names=True, dtype=None,
                         encoding="utf-8")
    kappa = np.zeros(grid.n_cells)
    kappa[rows["cell"].astype(int)] = rows["kappa"].astype(float)
    wz = _kv(weitzman_path)
    weitzman = (float(wz.get("c1", 20.46)), float(wz.get("c2", 6.081)),
                float(wz.get("p", 6.754)))
    return DamageParams(dice_a=dice_a, rice=rice, kw=kw, kompas=kappa,
                        weitzman=weitzman)


def _kv(path) -> dict:
    out = {}
    with open(path) as f:
        for line in f:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            key, _, value = line.partition("=")
            out[key.strip()] = value.strip()
    return out
