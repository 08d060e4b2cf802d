"""Monte Carlo lightning performance of a shielded overhead line.

Strokes are sampled over a ground strip that straddles the line, attributed
to ground, shield wires, or phase conductors with an electrogeometric
model, and every stroke that reaches the line is replayed as a surge on a
traveling-wave network to decide whether an insulator string flashes over.
"""

from __future__ import annotations

import csv
import math
import multiprocessing
from dataclasses import dataclass, field, replace

import numpy as np

from .emt import DoubleRampSource, EmtNetwork

LIGHT_SPEED_M_S = 299_792_458.0

# Lateral attraction radii grow with the return-stroke peak current.
WIRE_RADIUS_KA_COEFF = 7.1
GROUND_RADIUS_KA_COEFF = 6.4
RADIUS_KA_EXPONENT = 0.75

# A stroke lands on a structure when it is within this fraction of the span
# from the nearest tower; fatter bands for fatter strokes.
TOWER_BAND_HIGH_KA = 64.0
TOWER_BAND_LOW_KA = 25.0

WIRE_GROUND = "Ground"
WIRE_SHIELD = "Shield wire"
WIRE_PHASE_A = "Phase A"
WIRE_PHASE_C = "Phase C"

PLACE_TOWER = "Tower"
PLACE_SPAN = "Span"

EVENTS_HEADER = ("PhaseAngle", "StrokePeak", "FrontTime", "HalfPeak",
                 "Wire", "Tower", "Flashover")


@dataclass(frozen=True)
class LineGeometry:
    """Flat-configuration line: three phases under two shield wires.

    Heights are at the towers; sags lower the wires at midspan.  The outer
    phases sit at +-phase_y_m, the shields at +-shield_y_m, and the middle
    phase on the centerline where the shield wires screen it completely.
    """

    phase_y_m: float = 6.0
    phase_height_m: float = 7.0
    phase_sag_m: float = 3.5
    shield_y_m: float = 1.9219
    shield_height_m: float = 10.5
    shield_sag_m: float = 4.718
    span_m: float = 321.8688
    tower_count: int = 5
    strip_half_width_m: float = 500.0

    def __post_init__(self):
        if self.tower_count < 2:
            raise ValueError("need at least two towers")
        if self.span_m <= 0 or self.strip_half_width_m <= 0:
            raise ValueError("span and strip width must be positive")
        if not 0 < self.phase_y_m or not 0 < self.shield_y_m:
            raise ValueError("wire offsets must be positive")
        if self.shield_height_m <= self.phase_height_m:
            raise ValueError("shield wires must run above the phases")
        if not 0 <= self.phase_sag_m < self.phase_height_m:
            raise ValueError("phase sag out of range")
        if not 0 <= self.shield_sag_m < self.shield_height_m:
            raise ValueError("shield sag out of range")
        mid_shield = self.shield_height_m - self.shield_sag_m
        mid_phase = self.phase_height_m - self.phase_sag_m
        if mid_shield <= mid_phase:
            raise ValueError("shield wires must clear the phases at midspan")

    @property
    def span_count(self) -> int:
        return self.tower_count - 1

    @property
    def line_length_m(self) -> float:
        return self.span_count * self.span_m

    def towers_x(self) -> np.ndarray:
        return np.arange(self.tower_count) * self.span_m

    def shield_positions(self, at_midspan: bool = False) -> tuple:
        h = self.shield_height_m - (self.shield_sag_m if at_midspan else 0.0)
        return ((-self.shield_y_m, h), (self.shield_y_m, h))

    def outer_phase_positions(self, at_midspan: bool = False) -> tuple:
        h = self.phase_height_m - (self.phase_sag_m if at_midspan else 0.0)
        return ((-self.phase_y_m, h), (self.phase_y_m, h))


DEFAULT_GEOMETRY = LineGeometry()


def striking_distances(peak_ka: float) -> tuple:
    """Attraction radii (wire, ground) in meters for a peak current in kA."""
    if peak_ka <= 0:
        raise ValueError("peak current must be positive")
    scale = peak_ka ** RADIUS_KA_EXPONENT
    return WIRE_RADIUS_KA_COEFF * scale, GROUND_RADIUS_KA_COEFF * scale


@dataclass(frozen=True)
class Impact:
    """Where one stroke terminates."""

    target: str            # "ground", "shield", or "phase"
    place: str = ""        # "tower" or "span" for line strokes
    index: int = -1        # tower index or span index for line strokes
    phase: str = ""        # "a" or "c" for phase strokes

    @property
    def on_line(self) -> bool:
        return self.target != "ground"

    @property
    def wire_label(self) -> str:
        if self.target == "ground":
            return WIRE_GROUND
        if self.target == "shield":
            return WIRE_SHIELD
        return WIRE_PHASE_A if self.phase == "a" else WIRE_PHASE_C

    @property
    def place_label(self) -> str:
        if self.target == "ground":
            return ""
        return PLACE_TOWER if self.place == "tower" else PLACE_SPAN


def _capture_height(y: float, wire_y: float, wire_h: float, radius: float) -> float:
    """Height where a channel descending at y meets the wire's circle."""
    gap = radius * radius - (y - wire_y) ** 2
    if gap < 0:
        return -math.inf
    return wire_h + math.sqrt(gap)


def classify_impact(x_m: float, y_m: float, peak_ka: float,
                    geometry: LineGeometry = DEFAULT_GEOMETRY) -> Impact:
    """Attribute one stroke to ground, a shield wire, or an outer phase.

    The channel descends vertically at y and terminates on whatever surface
    it meets first: a wire's attraction circle or the ground plane.  Wire
    attribution always uses the tower cross-section; the middle phase is
    screened and never takes a direct hit.  Line strokes then land on a
    tower or within a span depending on how close x falls to a structure,
    with a capture band that widens with the peak current.
    """
    rc, rg = striking_distances(peak_ka)
    shield = max(_capture_height(y_m, wy, wh, rc)
                 for wy, wh in geometry.shield_positions())
    left, right = geometry.outer_phase_positions()
    phase_left = _capture_height(y_m, left[0], left[1], rc)
    phase_right = _capture_height(y_m, right[0], right[1], rc)
    phase = max(phase_left, phase_right)
    if max(shield, phase) <= rg:
        return Impact("ground")

    target = "phase" if phase > shield else "shield"
    towers = geometry.towers_x()
    nearest = int(np.argmin(np.abs(towers - x_m)))
    distance = abs(towers[nearest] - x_m)
    if peak_ka > TOWER_BAND_HIGH_KA:
        band = geometry.span_m / 4.0
    elif peak_ka >= TOWER_BAND_LOW_KA:
        band = geometry.span_m / 8.0
    else:
        band = geometry.span_m / 16.0
    if distance <= band:
        place, index = "tower", nearest
    else:
        place = "span"
        index = min(int(x_m // geometry.span_m), geometry.span_count - 1)
    side = "a" if phase_left >= phase_right else "c"
    return Impact(target, place, index, side if target == "phase" else "")


def exposure_width(geometry: LineGeometry, peak_ka: float,
                   at_midspan: bool = False, grid_points: int = 120_000) -> float:
    """Width of ground strip from which a stroke reaches a phase conductor.

    Scans lateral positions on one side of the line (the geometry is
    symmetric) and doubles the width where an outer phase outcompetes both
    the shield wires and the ground plane.
    """
    rc, rg = striking_distances(peak_ka)
    shields = geometry.shield_positions(at_midspan)
    phases = geometry.outer_phase_positions(at_midspan)
    reach = max(abs(p[0]) for p in phases) + rc + 2.0
    y = np.linspace(0.0, reach, grid_points)

    def capture(wire_y, wire_h):
        gap = rc * rc - (y - wire_y) ** 2
        height = np.full_like(y, -np.inf)
        ok = gap >= 0
        height[ok] = wire_h + np.sqrt(gap[ok])
        return height

    shield_best = np.maximum.reduce([capture(*w) for w in shields])
    phase_best = np.maximum.reduce([capture(*w) for w in phases])
    exposed = (phase_best > shield_best) & (phase_best > rg)
    return 2.0 * float(exposed.sum()) * (y[1] - y[0])


@dataclass(frozen=True)
class CriticalCurrents:
    """Largest peak currents that can still reach a phase conductor."""

    tower_ka: float
    span_ka: float


def _critical(geometry: LineGeometry, at_midspan: bool,
              lo: float = 1.0, hi: float = 300.0, tol: float = 0.005) -> float:
    if exposure_width(geometry, hi, at_midspan) > 0:
        return math.inf
    if exposure_width(geometry, lo, at_midspan) <= 0:
        return 0.0
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if exposure_width(geometry, mid, at_midspan) > 0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def critical_currents(geometry: LineGeometry = DEFAULT_GEOMETRY) -> CriticalCurrents:
    """Shielding-failure limits at the towers and at midspan, in kA."""
    return CriticalCurrents(tower_ka=_critical(geometry, at_midspan=False),
                            span_ka=_critical(geometry, at_midspan=True))


def calibrate_geometry(geometry: LineGeometry = DEFAULT_GEOMETRY,
                       tower_target_ka: float = 17.62,
                       span_target_ka: float = 64.15) -> LineGeometry:
    """Retune shield placement so the shielding-failure limits hit targets.

    Pulls the shield wires toward the centerline to raise the tower limit
    (centered shields leave the outer phases exposed to bigger strokes)
    and deepens their sag to raise the midspan limit, each by bisection;
    returns a new geometry rounded to 0.1 mm.
    """
    lo, hi = 0.05, geometry.phase_y_m
    for _ in range(40):
        mid = 0.5 * (lo + hi)
        trial = replace(geometry, shield_y_m=mid)
        if _critical(trial, at_midspan=False) > tower_target_ka:
            lo = mid
        else:
            hi = mid
    shield_y = round(0.5 * (lo + hi), 4)
    adjusted = replace(geometry, shield_y_m=shield_y)

    max_sag = (adjusted.shield_height_m
               - (adjusted.phase_height_m - adjusted.phase_sag_m) - 0.05)
    lo, hi = 0.0, max_sag
    if _critical(replace(adjusted, shield_sag_m=hi), at_midspan=True) < span_target_ka:
        raise ValueError("span target not reachable with this geometry")
    for _ in range(40):
        mid = 0.5 * (lo + hi)
        trial = replace(adjusted, shield_sag_m=mid)
        if _critical(trial, at_midspan=True) < span_target_ka:
            lo = mid
        else:
            hi = mid
    return replace(adjusted, shield_sag_m=round(0.5 * (lo + hi), 4))


@dataclass
class StrokeSample:
    """One batch of sampled strokes; every field is an array of length n."""

    x_m: np.ndarray
    y_m: np.ndarray
    angle_deg: np.ndarray
    peak_ka: np.ndarray
    front_us: np.ndarray
    half_us: np.ndarray
    footing_ohm: np.ndarray
    strength_kv: np.ndarray

    def __len__(self) -> int:
        return self.x_m.size

    def event(self, i: int) -> "StrokeEvent":
        return StrokeEvent(x_m=float(self.x_m[i]),
                           y_m=float(self.y_m[i]),
                           angle_deg=float(self.angle_deg[i]),
                           peak_ka=float(self.peak_ka[i]),
                           front_us=float(self.front_us[i]),
                           half_us=float(self.half_us[i]),
                           footing_ohm=float(self.footing_ohm[i]),
                           strength_kv=float(self.strength_kv[i]))


@dataclass(frozen=True)
class StrokeEvent:
    """One stroke, scalar form."""

    x_m: float
    y_m: float
    angle_deg: float
    peak_ka: float
    front_us: float
    half_us: float
    footing_ohm: float
    strength_kv: float


PEAK_MEDIAN_KA = 34.0
PEAK_SIGMA_LN = 0.740
FRONT_MEDIAN_US = 2.0
FRONT_SIGMA_LN = 0.494
HALF_MEDIAN_US = 77.5
HALF_SIGMA_LN = 0.577
FOOTING_RANGE_OHM = (10.0, 100.0)
STRENGTH_MEAN_KV = 977.5
STRENGTH_SD_KV = 48.875


def sample_strokes(n: int, seed: int,
                   geometry: LineGeometry = DEFAULT_GEOMETRY) -> StrokeSample:
    """Draw n strokes over the exposure strip.

    Peak current and both waveshape times are lognormal; the strike point
    is uniform over the strip; the footing resistance is uniform and the
    insulation strength normal, one value per stroke.
    """
    if n <= 0:
        raise ValueError("need a positive number of strokes")
    rng = np.random.default_rng(seed)
    x = rng.uniform(0.0, geometry.line_length_m, n)
    y = rng.uniform(-geometry.strip_half_width_m, geometry.strip_half_width_m, n)
    angle = rng.uniform(0.0, 360.0, n)
    peak = rng.lognormal(math.log(PEAK_MEDIAN_KA), PEAK_SIGMA_LN, n)
    front = rng.lognormal(math.log(FRONT_MEDIAN_US), FRONT_SIGMA_LN, n)
    half = rng.lognormal(math.log(HALF_MEDIAN_US), HALF_SIGMA_LN, n)
    footing = rng.uniform(FOOTING_RANGE_OHM[0], FOOTING_RANGE_OHM[1], n)
    strength = np.abs(rng.normal(STRENGTH_MEAN_KV, STRENGTH_SD_KV, n))
    return StrokeSample(x, y, angle, peak, front, half, footing, strength)


@dataclass(frozen=True)
class StudyConfig:
    """Everything one study run depends on."""

    n: int = 50_000
    seed: int = 1
    geometry: LineGeometry = field(default_factory=LineGeometry)
    system_kv: float = 230.0
    shield_surge_ohms: float = 23.0
    phase_surge_ohms: float = 110.0
    tower_base_radius_m: float = 8.0
    tower_speed_factor: float = 0.85
    extension_towers: int = 2
    dt_s: float = 20e-9
    t_end_s: float = 15e-6
    ground_flash_density: float = 2.2
    strip_length_km: float = 1.0
    threads: int = 1

    def __post_init__(self):
        if self.n <= 0:
            raise ValueError("need a positive number of strokes")
        if self.threads < 1:
            raise ValueError("threads must be at least 1")
        if self.dt_s <= 0 or self.t_end_s <= self.dt_s:
            raise ValueError("need 0 < dt < simulation window")
        if self.extension_towers < 1:
            raise ValueError("need at least one extension tower per side")
        tau_tower = self.geometry.shield_height_m / (self.tower_speed_factor
                                                     * LIGHT_SPEED_M_S)
        if tau_tower < self.dt_s:
            raise ValueError("dt exceeds the tower travel time; reduce dt")

    @property
    def tower_surge_ohms(self) -> float:
        h = self.geometry.shield_height_m
        return 60.0 * (math.log(math.sqrt(2.0) * 2.0 * h
                                / self.tower_base_radius_m) - 1.0)


def build_strike_network(event: StrokeEvent, impact: Impact,
                         config: StudyConfig) -> tuple:
    """Assemble the traveling-wave network for one line stroke.

    The struck line is padded with extension towers on both sides; every
    conductor ends in its matched impedance, the phases behind steady
    sources that hold the instantaneous power-frequency voltage, so the
    network sits in exact equilibrium until the surge arrives.  Returns
    the network and the insulator switches on the real towers.
    """
    if not impact.on_line:
        raise ValueError("only line strokes get a network")
    geom = config.geometry
    ext = config.extension_towers
    total = geom.tower_count + 2 * ext
    tau_tower = geom.shield_height_m / (config.tower_speed_factor * LIGHT_SPEED_M_S)
    tau_span = geom.span_m / LIGHT_SPEED_M_S
    z_tower = config.tower_surge_ohms
    z_shield = config.shield_surge_ohms
    z_phase = config.phase_surge_ohms

    v_peak = math.sqrt(2.0) * config.system_kv * 1e3 / math.sqrt(3.0)
    volts = {p: v_peak * math.cos(math.radians(event.angle_deg + shift))
             for p, shift in (("a", 0.0), ("b", -120.0), ("c", 120.0))}

    net = EmtNetwork()
    for k in range(total):
        net.add_line(f"s{k}", f"g{k}", z_tower, tau_tower)
        net.add_resistor(f"g{k}", "ground", event.footing_ohm)
        for p in "abc":
            net.set_initial_voltage(f"p{p}{k}", volts[p])

    inject = None
    for k in range(total - 1):
        span = k - ext  # real span index for k between the real towers
        if impact.target == "shield" and impact.place == "span" and span == impact.index:
            net.add_line(f"s{k}", "mid", z_shield, tau_span / 2.0)
            net.add_line("mid", f"s{k + 1}", z_shield, tau_span / 2.0)
            inject = "mid"
        else:
            net.add_line(f"s{k}", f"s{k + 1}", z_shield, tau_span)
        for p in "abc":
            hit = (impact.target == "phase" and impact.place == "span"
                   and span == impact.index and p == impact.phase)
            if hit:
                net.set_initial_voltage("mid", volts[p])
                net.add_line(f"p{p}{k}", "mid", z_phase, tau_span / 2.0,
                             v0_a=volts[p], v0_b=volts[p])
                net.add_line("mid", f"p{p}{k + 1}", z_phase, tau_span / 2.0,
                             v0_a=volts[p], v0_b=volts[p])
                inject = "mid"
            else:
                net.add_line(f"p{p}{k}", f"p{p}{k + 1}", z_phase, tau_span,
                             v0_a=volts[p], v0_b=volts[p])

    last = total - 1
    net.add_resistor("s0", "ground", z_shield)
    net.add_resistor(f"s{last}", "ground", z_shield)
    for p in "abc":
        net.add_voltage_source(f"p{p}0", volts[p], z_phase)
        net.add_voltage_source(f"p{p}{last}", volts[p], z_phase)

    switches = [net.add_flashover_switch(f"s{k}", f"p{p}{k}",
                                         event.strength_kv * 1e3)
                for k in range(ext, ext + geom.tower_count) for p in "abc"]

    if inject is None:
        k = ext + impact.index
        inject = f"s{k}" if impact.target == "shield" else f"p{impact.phase}{k}"
    front = event.front_us * 1e-6
    half = max(event.half_us * 1e-6, front * 1.001)
    net.add_current_source(inject, DoubleRampSource(-event.peak_ka * 1e3,
                                                    front, half))
    return net, switches


@dataclass(frozen=True)
class EventResult:
    flashover: bool = False
    close_time_s: float | None = None
    failed: bool = False


def simulate_event(event: StrokeEvent, impact: Impact,
                   config: StudyConfig) -> EventResult:
    """Replay one line stroke; a solver failure is reported, not raised."""
    try:
        net, switches = build_strike_network(event, impact, config)
        sim = net.assemble(config.dt_s)
        sim.run(config.t_end_s, stop_on_first_flashover=True)
    except Exception:
        return EventResult(failed=True)
    closed = [s.close_time for s in switches if s.closed]
    if closed:
        return EventResult(flashover=True, close_time_s=min(closed))
    return EventResult()


def _simulate_indexed(args) -> tuple:
    i, event, impact, config = args
    return i, simulate_event(event, impact, config)


@dataclass(frozen=True)
class StrokeCounts:
    """Partition of one batch of strokes by termination and outcome."""

    total: int
    ground: int
    line: int
    shield: int
    phase: int
    tower: int
    span: int
    shield_tower: int
    shield_span: int
    phase_tower: int
    phase_span: int
    flashovers: int
    flashover_tower: int
    flashover_span: int
    failures: int


@dataclass(frozen=True)
class FlashoverRate:
    """Exposure implied by a stroke batch and the resulting line rate."""

    years: int
    per_100km_year: float


def flashover_rate(n_strokes: int, n_flashovers: int, l1_km: float,
                   l2_km: float, ground_flash_density: float) -> FlashoverRate:
    """Scale batch counts to flashovers per 100 km-year.

    The batch covers an l1 x l2 km strip; with the given ground flash
    density it represents n / (l1 * l2 * density) years of exposure,
    rounded to whole years, over a line of length l2.
    """
    if n_strokes <= 0:
        raise ValueError("need a positive stroke count")
    if n_flashovers < 0 or n_flashovers > n_strokes:
        raise ValueError("flashover count out of range")
    if l1_km <= 0 or l2_km <= 0 or ground_flash_density <= 0:
        raise ValueError("strip dimensions and flash density must be positive")
    years = round(n_strokes / (l1_km * l2_km * ground_flash_density))
    rate = (n_flashovers / years) * (100.0 / l2_km)
    return FlashoverRate(years=years, per_100km_year=rate)


@dataclass
class StudyResult:
    config: StudyConfig
    sample: StrokeSample
    impacts: list
    flashover: np.ndarray      # bool per stroke
    failed: np.ndarray         # bool per stroke
    counts: StrokeCounts
    rate: FlashoverRate


def _count(sample: StrokeSample, impacts: list, flash: np.ndarray,
           failed: np.ndarray) -> StrokeCounts:
    n = len(sample)
    ground = sum(1 for im in impacts if not im.on_line)
    shield = sum(1 for im in impacts if im.target == "shield")
    phase = sum(1 for im in impacts if im.target == "phase")
    s_t = sum(1 for im in impacts if im.target == "shield" and im.place == "tower")
    p_t = sum(1 for im in impacts if im.target == "phase" and im.place == "tower")
    f_t = sum(1 for im, f in zip(impacts, flash) if f and im.place == "tower")
    nf = int(flash.sum())
    return StrokeCounts(total=n, ground=ground, line=n - ground,
                        shield=shield, phase=phase,
                        tower=s_t + p_t, span=n - ground - s_t - p_t,
                        shield_tower=s_t, shield_span=shield - s_t,
                        phase_tower=p_t, phase_span=phase - p_t,
                        flashovers=nf, flashover_tower=f_t,
                        flashover_span=nf - f_t,
                        failures=int(failed.sum()))


def run_study(config: StudyConfig = StudyConfig()) -> StudyResult:
    """Sample strokes, attribute them, and replay every line stroke.

    The surge replays are independent, so they can fan out over worker
    processes; results are reduced in stroke order and depend only on the
    configuration and seed, never on the worker count.
    """
    sample = sample_strokes(config.n, config.seed, config.geometry)
    impacts = [classify_impact(sample.x_m[i], sample.y_m[i],
                               sample.peak_ka[i], config.geometry)
               for i in range(config.n)]
    flash = np.zeros(config.n, dtype=bool)
    failed = np.zeros(config.n, dtype=bool)
    jobs = [(i, sample.event(i), impacts[i], config)
            for i in range(config.n) if impacts[i].on_line]
    if config.threads > 1 and len(jobs) > 1:
        with multiprocessing.Pool(config.threads) as pool:
            results = pool.map(_simulate_indexed, jobs, chunksize=16)
    else:
        results = [_simulate_indexed(job) for job in jobs]
    for i, res in results:
        flash[i] = res.flashover
        failed[i] = res.failed
    counts = _count(sample, impacts, flash, failed)
    rate = flashover_rate(config.n, counts.flashovers, config.strip_length_km,
                          config.geometry.line_length_m / 1e3,
                          config.ground_flash_density)
    return StudyResult(config=config, sample=sample, impacts=impacts,
                       flashover=flash, failed=failed, counts=counts,
                       rate=rate)


def write_events_csv(path, result: StudyResult):
    """One row per stroke: waveshape, termination, and the verdict."""
    sample = result.sample
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(EVENTS_HEADER)
        for i in range(len(sample)):
            im = result.impacts[i]
            writer.writerow((repr(float(sample.angle_deg[i])),
                             repr(float(sample.peak_ka[i])),
                             repr(float(sample.front_us[i])),
                             repr(float(sample.half_us[i])),
                             im.wire_label, im.place_label,
                             int(result.flashover[i])))


def flashover_dataset(result: StudyResult):
    """Learning frame for flashover prediction: strokes that reached the line,
    waveshape columns numeric, termination columns one-hot."""
    from . import ml

    keep = [i for i, im in enumerate(result.impacts) if im.on_line]
    if not keep:
        raise ValueError("no strokes reached the line")
    s = result.sample
    numeric = np.column_stack([s.angle_deg[keep], s.peak_ka[keep],
                               s.front_us[keep], s.half_us[keep]])
    names = ["PhaseAngle", "StrokePeak", "FrontTime", "HalfPeak"]
    wires, wire_cats = ml.one_hot([result.impacts[i].wire_label for i in keep])
    places, place_cats = ml.one_hot([result.impacts[i].place_label for i in keep])
    names += [f"Wire={c}" for c in wire_cats] + [f"Tower={c}" for c in place_cats]
    features = np.hstack([numeric, wires, places])
    labels = result.flashover[keep].astype(int)
    return ml.Dataset(features, labels, tuple(names), "Flashover")


def summary_lines(result: StudyResult) -> list:
    """Counts, flashovers, and the line rate as 'label = value' text."""
    c = result.counts
    km = result.config.geometry.line_length_m / 1e3
    lines = [
        f"Number of strokes to ground = {c.ground}",
        f"Number of strokes to the line = {c.line}",
        f"Number of strokes to towers = {c.tower}",
        f"Number of strokes to spans = {c.span}",
        f"Number of strokes to shield wires = {c.shield}",
        f"Number of strokes to shield wires at towers = {c.shield_tower}",
        f"Number of strokes to shield wires at spans = {c.shield_span}",
        f"Number of strokes to conductors = {c.phase}",
        f"Number of strokes to conductors at towers = {c.phase_tower}",
        f"Number of strokes to conductors at spans = {c.phase_span}",
        "",
        f"Number of flashovers = {c.flashovers}",
        f"Number of flashovers caused by strokes to spans = {c.flashover_span}",
        f"Number of flashovers caused by strokes to towers = {c.flashover_tower}",
        "",
        f"Number of random generated strokes = {c.total}",
        f"Length of the simulated test line = {km:.3f} (km)",
        f"Stroke density = {result.config.ground_flash_density:g}"
        " (strokes per km2 and year)",
        f"Number of total flashovers = {c.flashovers}",
        f"Number of simulated years = {result.rate.years}",
        f"Flashover rate = {result.rate.per_100km_year:.2f}"
        " (flashovers per 100 km and year)",
    ]
    if c.failures:
        lines += ["", f"Number of failed surge replays = {c.failures}"]
    return lines


def write_summary(path, result: StudyResult):
    with open(path, "w") as fh:
        fh.write("\n".join(summary_lines(result)) + "\n")
