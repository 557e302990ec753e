"""Separate interleaved frames of several LEDs seen by one detector.

A single photodetector pointed at a panel of indicator LEDs reports only
the total light.  When the individual sources switch with roughly equal
step size, the total is a staircase whose steps reveal each on and off
edge.  This module turns a combined waveform into timed edge events,
estimates the shared bit clock from those events, and greedily assigns
each edge to the concurrent frame stream whose next cell boundary it
fits, reconstructing every stream's bytes.

Levels are tracked in the optical domain: 1 means lit.  With the usual
space-lit wiring a lit cell carries logical 0, so payload bits are the
inverse of the optical cells.

The assignment is greedy nearest-boundary.  When more streams have a
legal boundary at an edge than the edge has units of amplitude, the
nearest ones win and the event is flagged as ambiguous; callers who need
certainty should treat flagged captures as unresolved.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import (
    AmbiguousAlignment,
    AmplitudeMismatch,
    InsufficientTransitions,
    NoDominantPeak,
    SampleRateTooLow,
)
from .lineproto import FrameFormat, encode, parity_bit
from .signals import OpticalWaveform, line_to_samples

ALIGNMENT_TOLERANCE = 0.05  # of one unit interval
_LINE_SNR = 6.0  # spectral lines must clear the median by this factor


@dataclass(frozen=True)
class TransitionEvent:
    """One step of the combined waveform: +1 per source lighting, -1 per
    source going dark, with ``magnitude`` counting coincident sources."""

    time: float
    direction: int
    magnitude: int = 1

    def __post_init__(self) -> None:
        if self.direction not in (-1, 1):
            raise ValueError("direction must be +1 or -1")
        if self.magnitude < 1:
            raise ValueError("magnitude must be at least 1")


def extract_events(
    wave: OpticalWaveform,
    *,
    min_samples_per_step: int = 1,
    relative_floor: float = 1.0e-6,
) -> list[TransitionEvent]:
    """Edge events of a staircase waveform, one per unit step.

    Steps must be near-integer multiples of the smallest step; anything
    else raises AmplitudeMismatch, since unequal sources cannot be
    separated by amplitude counting.  Consecutive same-sign differences
    (an edge smeared over adjacent samples) merge into one event at
    their amplitude-weighted time.
    """
    x = np.asarray(wave.samples, dtype=np.float64)
    if len(x) < 3:
        raise SampleRateTooLow("waveform too short to carry events")
    d = np.diff(x)
    floor = relative_floor * float(np.max(np.abs(x))) if np.any(x) else 0.0
    idx = np.flatnonzero(np.abs(d) > floor)
    if len(idx) == 0:
        return []
    fs = wave.sample_rate

    # merge adjacent same-sign diffs into single smeared edges
    raw: list[tuple[float, float]] = []  # (time, signed amplitude)
    run_amp = d[idx[0]]
    run_t = (idx[0] + 0.5) / fs * abs(d[idx[0]])
    prev = idx[0]
    for i in idx[1:]:
        if i == prev + 1 and np.sign(d[i]) == np.sign(run_amp):
            run_amp += d[i]
            run_t += (i + 0.5) / fs * abs(d[i])
            prev = i
            continue
        raw.append((run_t / abs(run_amp), run_amp))
        run_amp = d[i]
        run_t = (i + 0.5) / fs * abs(d[i])
        prev = i
    raw.append((run_t / abs(run_amp), run_amp))

    if len(raw) > 1:
        gaps = np.diff([t for t, _ in raw])
        if float(gaps.min()) < 3.0 / fs:
            raise SampleRateTooLow(
                f"transition gap of {float(gaps.min()):.3g} s needs at least "
                f"{3.0 / float(gaps.min()):.3g} Hz to resolve, capture has {fs:g}"
            )

    unit = min(abs(a) for _, a in raw)
    events: list[TransitionEvent] = []
    for t, amp in raw:
        units = abs(amp) / unit
        mag = int(round(units))
        if mag < 1 or abs(units - mag) > 0.25:
            raise AmplitudeMismatch(
                f"step of {abs(amp):.3g} at {t:.6g} s is {units:.2f} of the "
                f"unit step {unit:.3g}; sources are not equal-amplitude"
            )
        events.append(TransitionEvent(t, 1 if amp > 0 else -1, mag))
    return events


def _line_power(times: np.ndarray, freq: float) -> float:
    """Power of the exact spectral line at ``freq`` for a point process."""
    phase = 2.0 * np.pi * freq * times
    return float(np.cos(phase).sum() ** 2 + np.sin(phase).sum() ** 2)


def _refine_period(times: np.ndarray, period: float) -> float:
    """Polish a period onto the exact maximum of its fundamental line."""
    f0 = 1.0 / period
    for halfwidth, points in ((0.02, 81), (0.001, 41)):
        grid = np.linspace((1.0 - halfwidth) * f0, (1.0 + halfwidth) * f0, points)
        powers = [_line_power(times, f) for f in grid]
        # keep the unrefined value when there is no line to lock onto
        if max(powers) <= 2.0 * min(powers):
            return period
        f0 = float(grid[int(np.argmax(powers))])
    return 1.0 / f0


def _expand_candidates(
    seeds: list[float], period_range: tuple[float, float]
) -> list[float]:
    """Integer multiples and fractions of each seed, deduplicated.

    A seed may be any harmonic or subharmonic of the true pitch, so both
    directions must be reachable from it.
    """
    out: list[float] = []
    for p in seeds:
        for cand in [p * m for m in range(1, 13)] + [p / m for m in range(2, 13)]:
            if not (period_range[0] <= cand <= period_range[1]):
                continue
            if any(abs(cand - s) < 0.015 * s for s in out):
                continue
            out.append(cand)
    return out


def _dominant_period(
    values: np.ndarray,
    bin_width: float,
    period_range: tuple[float, float],
    min_snr: float,
    coverage_share: float,
) -> float:
    """Pitch of the lattice underlying a set of positions on one axis.

    Bins the positions, takes the magnitude spectrum, and detects its
    lines.  The pitch is the smallest period whose harmonic comb covers
    nearly all the detected line power: a doubled candidate also covers
    everything but is larger, a halved candidate misses every odd line,
    and an unrelated candidate catches almost nothing.  Judging by
    coverage rather than by any one line's strength keeps the choice
    stable when concurrent sources interfere and individual harmonics
    fade; weak lines (under a quarter of the strongest) sit out the vote
    entirely so envelope residue cannot veto the pitch.
    """
    values = values - values.min()
    span = float(values.max())
    if span <= 0.0:
        raise NoDominantPeak("all positions coincide")
    nbins = int(np.ceil(span / bin_width)) + 1
    counts = np.zeros(nbins)
    np.add.at(counts, (values / bin_width).astype(int), 1.0)
    spectrum = np.abs(np.fft.rfft(counts - counts.mean()))
    freqs = np.fft.rfftfreq(nbins, d=bin_width)
    in_band = (freqs >= 1.0 / period_range[1]) & (freqs <= 1.0 / period_range[0])
    if not np.any(in_band):
        raise NoDominantPeak("period range is empty at this capture length")
    mag = spectrum[in_band]
    f_band = freqs[in_band]
    level = float(np.median(mag))
    if float(mag.max()) < min_snr * level:
        raise NoDominantPeak(
            f"strongest spectral peak is under {min_snr:g} times the "
            "in-band median level"
        )
    is_max = np.zeros(len(mag), dtype=bool)
    is_max[1:-1] = (mag[1:-1] >= mag[:-2]) & (mag[1:-1] >= mag[2:])
    is_max &= mag >= _LINE_SNR * level
    is_max &= mag >= 0.25 * float(mag.max())
    peak_idx = np.flatnonzero(is_max)
    if len(peak_idx) == 0:
        raise NoDominantPeak("no spectral line stands clear of the floor")
    peak_idx = peak_idx[np.argsort(mag[peak_idx])[::-1][:40]]

    # quadratic interpolation sharpens each line beyond the bin grid
    line_freqs: list[float] = []
    line_powers: list[float] = []
    df = float(freqs[1] - freqs[0])
    for i in peak_idx:
        f = f_band[i]
        if 0 < i < len(mag) - 1:
            a, b, c = mag[i - 1], mag[i], mag[i + 1]
            denom = a - 2.0 * b + c
            if denom < 0.0:
                f += 0.5 * (a - c) / denom * df
        line_freqs.append(float(f))
        line_powers.append(float(mag[i]) ** 2)
    f_lines = np.asarray(line_freqs)
    p_lines = np.asarray(line_powers)
    total = float(p_lines.sum())
    tol_f = np.maximum(1.5 * df, 0.002 * f_lines)

    covered: list[float] = []
    for cand in _expand_candidates([1.0 / f for f in f_lines], period_range):
        m = np.round(f_lines * cand)
        on_comb = (m >= 1.0) & (np.abs(f_lines - m / cand) <= tol_f)
        # power carries the decision; the count floor only blocks candidates
        # that ride a single strong line while missing most of the others
        if (
            float(np.mean(on_comb)) >= 0.6
            and float(p_lines[on_comb].sum()) >= coverage_share * total
        ):
            covered.append(cand)
    if not covered:
        raise NoDominantPeak(
            "no candidate period's harmonic comb covers the detected lines"
        )
    return _refine_period(values, min(covered))


def _interval_pitch(
    values: np.ndarray,
    bin_width: float,
    period_range: tuple[float, float],
    min_snr: float,
) -> float:
    """Lattice pitch of a set of durations (consecutive event spacings).

    Framed traffic from one source spaces its edges by whole multiples
    of the unit interval, so the distinct spacing durations sit on a
    lattice.  Short spacings dominate the raw counts, so the scan runs
    over the deduplicated durations with equal weight; a comb of sites
    then beats the spectral floor by a clear margin while a continuum of
    interleaved-source spacings does not.  The peak may land on any
    harmonic, so the pitch is the largest period that keeps nearly every
    site on-lattice while actually reaching past its first multiple.
    Spacings that concentrate on no lattice make the method refuse.
    """
    bins = np.round(values / bin_width).astype(np.int64)
    uniq, inverse = np.unique(bins, return_inverse=True)
    sites = np.bincount(inverse, weights=values) / np.bincount(inverse)
    if len(sites) < 4:
        raise NoDominantPeak("too few distinct spacings to show a lattice")
    span = float(sites.max() - sites.min())
    df = 1.0 / (4.0 * span)
    # a pitch longer than the spread has at most one occupied lattice site
    f_lo = 1.0 / min(period_range[1], span)
    f_hi = 1.0 / period_range[0]
    freqs = np.arange(f_lo, f_hi, df)
    if len(freqs) < 8:
        raise NoDominantPeak("period range is empty at this spacing spread")
    amp = np.empty(len(freqs))
    for lo in range(0, len(freqs), 4096):
        phase = 2.0 * np.pi * np.outer(freqs[lo : lo + 4096], sites)
        amp[lo : lo + 4096] = np.hypot(
            np.cos(phase).sum(axis=1), np.sin(phase).sum(axis=1)
        )
    level = float(np.median(amp))
    best = int(np.argmax(amp))
    if amp[best] < min_snr * level:
        raise NoDominantPeak(
            f"strongest spacing-spectrum peak is under {min_snr:g} times "
            "the median level"
        )
    # polish the peak so residues at high multiples do not smear off-grid;
    # the parabolic vertex handles low pitches whose whole lobe is wider
    # than the two-stage polish window
    f_peak = float(freqs[best])
    if 0 < best < len(freqs) - 1:
        a, b, c = amp[best - 1], amp[best], amp[best + 1]
        denom = a - 2.0 * b + c
        if denom < 0.0:
            f_peak += 0.5 * (a - c) / denom * df
    f_star = 1.0 / _refine_period(sites, 1.0 / f_peak)

    # The peak may be any harmonic of the true pitch (with equal-weight
    # sites every comb line is equally tall, so the argmax is a lottery
    # across them).  A genuine pitch p pulls nearly every site close to
    # its lattice and occupies most of its first several multiples; a
    # multiple of the pitch leaves the odd sites stranded near p/2, a
    # period beyond the sites collects nothing past its first multiple,
    # and a fine sub-lattice that happens to catch interleaved sources
    # occupies only scattered multiples.
    m_hi = min(int(f_star * period_range[1]), 4000)
    for m in range(m_hi, 0, -1):
        p = m / f_star
        if not (period_range[0] <= p <= period_range[1]):
            continue
        multiples = np.round(sites / p)
        if float(np.mean(multiples >= 1.0)) < 0.5:
            continue
        r = np.mod(sites, p) / p
        on = (r <= 0.06) | (r >= 0.94)
        if float(np.mean(on)) < 0.9:
            continue
        k_max = min(10.0, float(multiples[on].max()))
        occupied = np.unique(multiples[on & (multiples >= 1.0) & (multiples <= k_max)])
        if len(occupied) < 0.5 * k_max:
            continue
        return _refine_period(values, p)
    raise NoDominantPeak("spacings do not concentrate on any lattice")


def estimate_ui(
    events: list[TransitionEvent],
    *,
    method: str = "spectrum",
    bin_width: float = 2.0e-6,
    period_range: tuple[float, float] = (1.0e-5, 1.0e-2),
    min_snr: float = 2.0,
    coverage_share: float = 0.85,
) -> float:
    """Shared unit interval implied by a set of edge events.

    Edges of framed traffic land on a lattice whose pitch is the unit
    interval, so the spectrum of the transition-time point process (a sum
    of unit impulses at the event times) carries lines at the bit rate and
    its harmonics.  The default method searches ``period_range`` for the
    period those lines agree on, as documented in _dominant_period.

    ``method="intervals"`` reads the sequence of spacings between
    consecutive events instead of the event times: one source's spacings
    take values on the same lattice, so their spectrum along the duration
    axis shows the same pitch.  This reading needs no long coherent
    capture, but it discards absolute phase: spacings that straddle
    heavily interleaved sources concentrate on no lattice and make the
    method refuse, and two or three sources whose mutual offset sits
    near a simple fraction of the unit interval present spacings that
    genuinely occupy that finer lattice, which is then reported.  Mixed
    captures belong to the default method, which keeps event times and
    is immune to both effects.

    A capture whose frames hold constant fill (say every byte 0x00) only
    exposes the character period; no estimator can do better from edges
    alone.  Raises InsufficientTransitions for fewer than 20 events and
    NoDominantPeak when the spectrum's peak is under ``min_snr`` times
    the median in-band level or the lines do not agree on a period.
    """
    if len(events) < 20:
        raise InsufficientTransitions(
            f"need at least 20 events to estimate a clock, got {len(events)}"
        )
    times = np.asarray(sorted(e.time for e in events), dtype=np.float64)
    if method == "spectrum":
        return _dominant_period(
            times, bin_width, period_range, min_snr, coverage_share
        )
    if method == "intervals":
        values = np.diff(times)
        # spacings far beyond the period range carry no lattice signal
        values = values[values <= 20.0 * period_range[1]]
        if len(values) < 10:
            raise NoDominantPeak("too few spacings inside the period range")
        return _interval_pitch(values, bin_width, period_range, min_snr)
    raise ValueError(f"unknown method {method!r}")


@dataclass(frozen=True)
class StreamHypothesis:
    """One reconstructed source: when it started, its clock, and the
    optical cell values (1 = lit) of every completed frame.  ``bits``
    holds the cells of a frame the capture cut short; ``next_decision``
    is the instant the stream would examine next."""

    id: int
    start_time: float
    unit_interval: float
    frames: tuple[tuple[int, ...], ...]
    bits: tuple[int, ...] = ()
    next_decision: float = 0.0

    def payload(self, fmt: FrameFormat) -> bytes:
        """Logical bytes of the completed frames (lit cell = logical 0)."""
        out = bytearray()
        for cells in self.frames:
            value = 0
            for i in range(fmt.data_bits):
                value |= (1 - cells[1 + i]) << i
            out.append(value)
        return bytes(out)

    def parity_ok(self, fmt: FrameFormat) -> bool:
        if fmt.parity == "none":
            return True
        p_idx = 1 + fmt.data_bits
        for cells in self.frames:
            value = 0
            for i in range(fmt.data_bits):
                value |= (1 - cells[1 + i]) << i
            if (1 - cells[p_idx]) != parity_bit(value, fmt):
                return False
        return True


@dataclass(frozen=True)
class DemixResult:
    """Streams plus the audit trail of how every event was used.

    ``framing_flags`` rows are (time, stream id, description) for streams
    whose level contradicted their frame structure, such as staying lit
    into the stop period.
    """

    streams: tuple[tuple[StreamHypothesis, bytes], ...]
    unassigned: tuple[TransitionEvent, ...]
    ambiguity_flags: tuple[AmbiguousAlignment, ...]
    framing_flags: tuple[tuple[float, int, str], ...]
    assignments: tuple[tuple[int, ...], ...]

    @property
    def unassigned_events(self) -> int:
        """How many event units matched no stream (down steps only)."""
        return sum(e.magnitude for e in self.unassigned)

    @property
    def clean(self) -> bool:
        return (
            not self.unassigned
            and not self.ambiguity_flags
            and not self.framing_flags
        )


@dataclass
class _Stream:
    stream_id: int
    ui: float
    fmt: FrameFormat
    anchor: float
    start_time: float
    lit: bool = True
    cell_index: int = 1
    awaiting: bool = False
    closed: bool = False
    cells: list[int] = field(default_factory=lambda: [1])
    frames: list[tuple[int, ...]] = field(default_factory=list)

    @property
    def stop_boundary(self) -> int:
        return 1 + self.fmt.data_bits + self.fmt.parity_bits

    @property
    def next_boundary(self) -> float:
        if self.awaiting:
            return self.anchor + self.fmt.units_per_character * self.ui
        return self.anchor + self.cell_index * self.ui

    def accepts(self, direction: int) -> bool:
        return (direction > 0) != self.lit

    def advance(
        self, new_level: bool | None, flags: list[tuple[float, int, str]]
    ) -> None:
        """Apply one boundary decision; None means no event (level holds)."""
        when = self.next_boundary
        if self.awaiting:
            if new_level is None:
                self.closed = True
            elif new_level:
                # next character follows back to back
                self.anchor = when
                self.lit = True
                self.cells = [1]
                self.cell_index = 1
                self.awaiting = False
            else:
                raise AssertionError("dark stream cannot accept a release")
            return
        level = self.lit if new_level is None else new_level
        if self.cell_index < self.stop_boundary:
            self.lit = level
            self.cells.append(1 if level else 0)
            self.cell_index += 1
            return
        # boundary into the stop period: the source must go (or stay) dark
        if level:
            flags.append((when, self.stream_id, "lit into its stop period"))
            self.closed = True
            return
        self.lit = False
        self.frames.append(tuple(self.cells))
        self.cells = []
        self.awaiting = True


def demix(
    events: list[TransitionEvent],
    unit_interval: float,
    fmt: FrameFormat,
    *,
    tolerance: float = ALIGNMENT_TOLERANCE,
) -> DemixResult:
    """Assign edge events to concurrent frame streams sharing one clock.

    Every event unit either lands on the next cell boundary of an active
    stream (within ``tolerance`` of a unit interval), opens a new stream
    when it is a lighting edge, or ends up in ``unassigned``.  Assigned
    boundaries re-anchor their stream's clock to the observed edge so
    small rate mismatch does not accumulate.  Boundaries that pass
    without an event keep the previous level; a source still lit when its
    stop period begins is flagged and abandoned.
    """
    tol = tolerance * unit_interval
    streams: list[_Stream] = []
    ambiguity: list[AmbiguousAlignment] = []
    framing: list[tuple[float, int, str]] = []
    unassigned: list[TransitionEvent] = []
    assignments: list[tuple[int, ...]] = []
    next_id = 1

    def flush_until(t: float) -> None:
        for s in streams:
            while not s.closed and s.next_boundary < t - tol:
                s.advance(None, framing)

    for event in sorted(events, key=lambda e: e.time):
        flush_until(event.time)
        lighting = event.direction > 0
        candidates = [
            s
            for s in streams
            if not s.closed
            and s.accepts(event.direction)
            and abs(s.next_boundary - event.time) <= tol
        ]
        candidates.sort(key=lambda s: abs(s.next_boundary - event.time))
        take = min(len(candidates), event.magnitude)
        used: list[int] = []
        for s in candidates[:take]:
            # re-anchor to the observed edge so clock drift cannot build up
            offset = event.time - s.next_boundary
            s.anchor += offset
            s.advance(lighting, framing)
            used.append(s.stream_id)
        if len(candidates) > event.magnitude:
            ambiguity.append(
                AmbiguousAlignment(
                    event.time,
                    f"{len(candidates)} streams aligned for "
                    f"{event.magnitude} unit(s); nearest won",
                )
            )
        leftover = event.magnitude - take
        if leftover > 0:
            if lighting:
                for _ in range(leftover):
                    streams.append(
                        _Stream(
                            stream_id=next_id,
                            ui=unit_interval,
                            fmt=fmt,
                            anchor=event.time,
                            start_time=event.time,
                        )
                    )
                    used.append(next_id)
                    next_id += 1
            else:
                unassigned.append(
                    TransitionEvent(event.time, event.direction, leftover)
                )
        assignments.append(tuple(used))

    # Quiet time after the last event.  A dark stream's remaining cells
    # are evidenced by the silence, so it rides to frame completion; a
    # stream still lit was cut short by the capture and keeps its partial
    # cells as ``bits``.
    for s in streams:
        if s.lit and not s.closed:
            s.closed = True
            continue
        while not s.closed:
            s.advance(None, framing)

    entries = []
    for s in sorted(streams, key=lambda s: s.start_time):
        hyp = StreamHypothesis(
            id=s.stream_id,
            start_time=s.start_time,
            unit_interval=unit_interval,
            frames=tuple(s.frames),
            bits=tuple(s.cells),
            next_decision=s.next_boundary,
        )
        entries.append((hyp, hyp.payload(fmt)))
    return DemixResult(
        streams=tuple(entries),
        unassigned=tuple(unassigned),
        ambiguity_flags=tuple(ambiguity),
        framing_flags=tuple(framing),
        assignments=tuple(assignments),
    )


_TEXT_CHARS = frozenset(
    " abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789"
    ".,;:!?'\"()-/@#$%&*+=\r\n\t"
)


def plausibility(payload: bytes, *, codec: str = "ascii") -> float:
    """Fraction of bytes that decode to printable text under ``codec``.

    Useful for ranking demixed streams: correctly separated console or
    modem traffic scores high, garbled assignments score low.  The
    ``cp037`` codec covers mainframe-era links that ship EBCDIC.
    """
    if not payload:
        return 0.0
    good = 0
    for b in payload:
        try:
            ch = bytes([b]).decode(codec)
        except UnicodeDecodeError:
            continue
        if ch in _TEXT_CHARS:
            good += 1
    return good / len(payload)


@dataclass(frozen=True)
class StreamReport:
    """Verdict on one demixed stream.  ``framing_ok`` is false when the
    demixer flagged the stream's level against its frame structure;
    ``encoding_ok`` is false when the payload violates the hinted
    character set."""

    stream_id: int
    frames: int
    framing_ok: bool
    encoding_ok: bool
    text_fraction: float

    @property
    def plausible(self) -> bool:
        return self.framing_ok and self.encoding_ok


def validate_streams(
    result: DemixResult, encoding_hint: str = "none"
) -> list[StreamReport]:
    """Plausibility report for every stream in a demix result.

    ``encoding_hint`` may be ``ascii``, ``ebcdic``, or ``none``.  An
    ASCII hint applies the most-significant-bit rule: any byte of 0x80
    or above disqualifies the stream.  An EBCDIC hint requires every
    byte to land on a printable cp037 character.  With no hint only the
    framing verdict can disqualify.
    """
    if encoding_hint not in ("ascii", "ebcdic", "none"):
        raise ValueError(f"unknown encoding hint {encoding_hint!r}")
    flagged = {stream_id for _, stream_id, _ in result.framing_flags}
    reports = []
    for hyp, payload in result.streams:
        if encoding_hint == "ascii":
            encoding_ok = all(b < 0x80 for b in payload)
            fraction = plausibility(payload, codec="ascii")
        elif encoding_hint == "ebcdic":
            fraction = plausibility(payload, codec="cp037")
            encoding_ok = fraction == 1.0 if payload else True
        else:
            encoding_ok = True
            fraction = plausibility(payload, codec="ascii")
        reports.append(
            StreamReport(
                stream_id=hyp.id,
                frames=len(hyp.frames),
                framing_ok=hyp.id not in flagged,
                encoding_ok=encoding_ok,
                text_fraction=fraction,
            )
        )
    return reports


def save_events(path: str, events: list[TransitionEvent]) -> None:
    """Write events as text: one ``time direction magnitude`` row each."""
    with open(path, "w", encoding="utf-8") as handle:
        handle.write("# time_s direction magnitude\n")
        for e in events:
            handle.write(f"{e.time:.9f} {e.direction:+d} {e.magnitude}\n")


def load_events(path: str) -> list[TransitionEvent]:
    events = []
    with open(path, encoding="utf-8") as handle:
        for line in handle:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split()
            events.append(
                TransitionEvent(
                    float(parts[0]),
                    int(parts[1]),
                    int(parts[2]) if len(parts) > 2 else 1,
                )
            )
    return events


def synthesize_scene(
    n_streams: int,
    fmt: FrameFormat,
    *,
    payload_len: int = 20,
    duration_chars: float = 25.0,
    sample_rate: float = 2.0e6,
    min_phase_sep: float = 0.07,
    seed=0,
) -> tuple[OpticalWaveform, list[tuple[float, bytes]]]:
    """Random multi-stream scene: summed waveform plus the ground truth.

    Each stream is a continuous run of ``payload_len`` random bytes,
    offset by a random sub-unit phase; phases are redrawn until every
    pair differs by at least ``min_phase_sep`` unit intervals so edges
    from different streams never land inside the same alignment window.
    Returns the optical sum and ``(start_time, payload)`` per stream,
    sorted by start time.
    """
    if n_streams < 1:
        raise ValueError("need at least one stream")
    if payload_len < 1:
        raise ValueError("payload_len must be positive")
    if not 0 < min_phase_sep * (n_streams + 1) < 0.9:
        raise ValueError(
            f"cannot fit {n_streams} phases {min_phase_sep} unit intervals apart"
        )
    rng = np.random.default_rng(seed)
    ui = fmt.unit_interval
    while True:
        phases = np.sort(rng.uniform(0.05, 0.95, n_streams))
        if n_streams == 1 or float(np.min(np.diff(phases))) >= min_phase_sep:
            break
    payloads = [
        bytes(rng.integers(0, 256, payload_len, dtype=np.uint8))
        for _ in range(n_streams)
    ]
    n_samples = int(round(duration_chars * fmt.character_interval * sample_rate))
    total = np.zeros(n_samples, dtype=np.float64)
    truth = []
    for phase, payload in zip(phases, payloads):
        start = float(phase) * ui
        line = encode(payload, fmt, lead_in=start)
        total += line_to_samples(line, sample_rate, n_samples=n_samples)
        truth.append((start, payload))
    return OpticalWaveform(sample_rate=sample_rate, samples=total), truth
