"""Brute-force validators.

Two independent machines: a time-domain Lindblad master equation for
the full qubit + cavity system in a truncated photon space, and a
Floquet quasi-energy solver for the driven two-level system. Both are
used by the test suite to validate every closed form; the CLI exposes
them for inspection.

Internal units here are genuinely angular (rad/ns) since absolute time
enters; all public inputs and outputs stay in GHz.
"""

from dataclasses import dataclass, field
from fractions import Fraction
from math import gcd

import numpy as np
from scipy.integrate import solve_ivp

from .core import DissipationRates, Tone, ghz_to_angular
from .steady import OperatingPoint


class NonConvergenceError(RuntimeError):
    """Steady state not reached within the configured window budget."""


class TruncationError(RuntimeError):
    """Photon-space truncation too small for the requested state."""


class ZoneFoldingError(ValueError):
    """Quasi-energy splitting cannot be folded unambiguously."""


@dataclass(frozen=True)
class TruncatedSystem:
    """Full system in a truncated photon space.

    The strong drive and the spectroscopy tone act on the qubit as
    classical fields through both the longitudinal (sigma_z) and
    transverse (sigma_x) projections; the probe drives the cavity.
    """

    fock_dim: int
    qubit_splitting_ghz: float
    longitudinal: float  # bias/splitting projection, weights sigma_z
    transverse: float    # gap/splitting projection, weights sigma_x
    resonator_freq_ghz: float
    coupling_ghz: float
    photon_decay_ghz: float
    rates: DissipationRates
    probe: Tone = None
    drive: Tone = None
    spectroscopy: Tone = None

    def __post_init__(self):
        if self.fock_dim < 2:
            raise ValueError("fock_dim must be >= 2")
        for tone, role in ((self.probe, "probe"), (self.drive, "drive"),
                           (self.spectroscopy, "spectroscopy")):
            if tone is not None and tone.role != role:
                raise ValueError(f"tone in slot {role} has role {tone.role}")

    def active_tones(self):
        out = []
        for tone in (self.probe, self.drive, self.spectroscopy):
            if tone is not None and tone.amplitude_ghz > 0:
                out.append(tone)
        return out


@dataclass(frozen=True)
class FloquetProblem:
    """Driven two-level quasi-energy problem."""

    wq_ghz: float
    wd_ghz: float
    bar_drive_ghz: float
    harmonic_cutoff: int = 12

    def __post_init__(self):
        if self.harmonic_cutoff < 3:
            raise ValueError("harmonic_cutoff must be >= 3")
        if self.wd_ghz <= 0:
            raise ValueError("wd_ghz must be > 0")


@dataclass(frozen=True)
class IntegratorConfig:
    """Adaptive-integration and steady-state detection settings."""

    rtol: float = 1e-10
    atol: float = 1e-12
    convergence_tol: float = 1e-8
    max_windows: int = 20000
    settle_time_ns: float = 0.0
    window_samples: int = 129          # samples per window for averaging
    windows_per_chunk: int = 16        # windows integrated per solver call
    fallback_periods: int = 200        # window length when tones are not commensurate


@dataclass
class EvolutionResult:
    """Converged time-periodic steady state and its window averages."""

    steady_density_matrix: np.ndarray
    period_averaged_expectations: dict
    trace_drift: float
    min_eigenvalue: float = 0.0
    top_fock_occupation: float = 0.0
    windows_used: int = 0
    window_ns: float = 0.0


def operators(fock_dim):
    """Dense operator set on the qubit (x) photon space.

    Qubit convention: sz = +1 is the excited state, the relaxation jump
    lowers excited to ground.
    """
    idq = np.eye(2, dtype=complex)
    idf = np.eye(fock_dim, dtype=complex)
    sz_q = np.diag([1.0, -1.0]).astype(complex)
    sx_q = np.array([[0, 1], [1, 0]], dtype=complex)
    sm_q = np.array([[0, 0], [1, 0]], dtype=complex)  # |g><e|
    a_f = np.diag(np.sqrt(np.arange(1, fock_dim, dtype=float)), 1).astype(complex)
    return {
        "sz": np.kron(sz_q, idf),
        "sx": np.kron(sx_q, idf),
        "sm": np.kron(sm_q, idf),
        "sp": np.kron(sm_q.T, idf),
        "a": np.kron(idq, a_f),
        "ad": np.kron(idq, a_f.conj().T),
        "n": np.kron(idq, a_f.conj().T @ a_f),
        "id": np.kron(idq, idf),
    }


def system_from_point(op: OperatingPoint, fock_dim=12):
    """Oracle system matching a steady-state operating point."""
    from .core import level_splitting, projections
    bar, check = projections(op.qubit, op.bias)
    probe = op.tones.probe
    if probe.amplitude_ghz == 0:
        probe = Tone(op.probe_amplitude_ghz(), probe.frequency_ghz, "probe")
    return TruncatedSystem(
        fock_dim=fock_dim,
        qubit_splitting_ghz=level_splitting(op.qubit, op.bias),
        longitudinal=check,
        transverse=bar,
        resonator_freq_ghz=op.resonator.fundamental_freq_ghz,
        coupling_ghz=op.resonator.coupling_ghz,
        photon_decay_ghz=op.resonator.photon_decay_ghz,
        rates=op.rates,
        probe=probe,
        drive=op.tones.drive,
        spectroscopy=op.tones.spectroscopy,
    )


def build_generator(sys: TruncatedSystem):
    """Right-hand side of the master equation.

    Returns apply(t, rho) -> drho/dt. The dissipators are folded into an
    effective non-hermitian Hamiltonian plus jump sandwiches; the
    diagonal dephasing sandwich reduces to an elementwise mask.
    """
    ops = operators(sys.fock_dim)
    wq = ghz_to_angular(sys.qubit_splitting_ghz)
    wr = ghz_to_angular(sys.resonator_freq_ghz)
    g = ghz_to_angular(sys.coupling_ghz)
    kappa = ghz_to_angular(sys.photon_decay_ghz)
    gr = ghz_to_angular(sys.rates.relaxation_ghz)
    gph = ghz_to_angular(sys.rates.pure_dephasing_ghz)

    coup = sys.longitudinal * ops["sz"] + sys.transverse * ops["sx"]
    h0 = wq / 2.0 * ops["sz"] + wr * ops["n"]
    if g:
        h0 = h0 + g * coup @ (ops["a"] + ops["ad"])
    sm, sp, a, ad = ops["sm"], ops["sp"], ops["a"], ops["ad"]
    # non-hermitian absorber for the anticommutator parts
    m = 0.5 * (gr * sp @ sm + kappa * ad @ a)
    he0 = h0 - 1j * m

    zdiag = np.kron([1.0, -1.0], np.ones(sys.fock_dim))
    zmask = np.outer(zdiag, zdiag)

    def tone_terms():
        qubit_tones = []
        for tone in (sys.drive, sys.spectroscopy):
            if tone is not None and tone.amplitude_ghz > 0:
                qubit_tones.append((ghz_to_angular(tone.amplitude_ghz),
                                    ghz_to_angular(tone.frequency_ghz)))
        probe_amp = probe_freq = 0.0
        if sys.probe is not None and sys.probe.amplitude_ghz > 0:
            probe_amp = ghz_to_angular(sys.probe.amplitude_ghz)
            probe_freq = ghz_to_angular(sys.probe.frequency_ghz)
        return qubit_tones, probe_amp, probe_freq

    qubit_tones, probe_amp, probe_freq = tone_terms()

    def apply(t, rho):
        h = he0.copy()
        if qubit_tones:
            c = 0.0
            for amp, freq in qubit_tones:
                c += amp * np.cos(freq * t)
            h += c * coup
        if probe_amp:
            z = probe_amp * np.exp(-1j * probe_freq * t)
            h += z * ad + np.conj(z) * a
        out = -1j * (h @ rho - rho @ h.conj().T)
        if gr:
            out += gr * (sm @ rho @ sp)
        if kappa:
            out += kappa * (a @ rho @ ad)
        if gph:
            out += 0.5 * gph * (zmask * rho - rho)
        return out

    apply.dim = 2 * sys.fock_dim
    return apply


def ground_state(sys: TruncatedSystem):
    """Qubit ground, cavity vacuum."""
    dim = 2 * sys.fock_dim
    rho = np.zeros((dim, dim), dtype=complex)
    rho[sys.fock_dim, sys.fock_dim] = 1.0  # |g, 0>
    return rho


def seeded_state(sys: TruncatedSystem, alpha, sz):
    """Diagonal qubit state with population sz times a coherent cavity
    state. Used to shorten ring-up; the dynamics still decides the
    fixed point."""
    n = np.arange(sys.fock_dim)
    log_fact = np.cumsum(np.log(np.maximum(n, 1)))
    amp = np.exp(-(abs(alpha) ** 2) / 2.0 + n * np.log(alpha)
                 - log_fact / 2.0) if alpha != 0 else \
        np.eye(sys.fock_dim, dtype=complex)[0]
    amp = np.asarray(amp, dtype=complex)
    amp /= np.linalg.norm(amp)
    cav = np.outer(amp, amp.conj())
    qub = np.diag([(1.0 + sz) / 2.0, (1.0 - sz) / 2.0]).astype(complex)
    return np.kron(qub, cav)


def evolve(sys: TruncatedSystem, t_span_ns, rho0=None, rtol=1e-10,
           atol=1e-12, t_eval=None):
    """Raw integration of the master equation over t_span_ns."""
    rhs = build_generator(sys)
    dim = rhs.dim
    if rho0 is None:
        rho0 = ground_state(sys)

    def flat_rhs(t, y):
        return rhs(t, y.reshape(dim, dim)).ravel()

    sol = solve_ivp(flat_rhs, t_span_ns, rho0.ravel().astype(complex),
                    method="DOP853", rtol=rtol, atol=atol, t_eval=t_eval,
                    dense_output=False)
    if not sol.success:
        raise RuntimeError(f"integration failed: {sol.message}")
    return sol


def _window_ns(sys: TruncatedSystem, config: IntegratorConfig):
    """Averaging window: the least common period of the active tones
    when rationally related, else fallback_periods of the probe (or the
    slowest active tone)."""
    freqs = [t.frequency_ghz for t in sys.active_tones()]
    if not freqs:
        raise ValueError("no active tones; there is no periodic steady state")
    if len(freqs) == 1:
        return 1.0 / freqs[0]
    base = freqs[0]
    denominators = []
    for f in freqs:
        frac = Fraction(f / base).limit_denominator(1000)
        if abs(float(frac) - f / base) > 1e-9:
            denominators = None
            break
        denominators.append(frac)
    if denominators is not None:
        lcm = 1
        for frac in denominators:
            lcm = lcm * frac.denominator // gcd(lcm, frac.denominator)
        return lcm / base
    if sys.probe is not None and sys.probe.amplitude_ghz > 0:
        return config.fallback_periods / sys.probe.frequency_ghz
    return config.fallback_periods / min(freqs)


def _window_stats(sys, ops, t, rhos):
    """Window averages and Fourier projections from dense samples."""
    span = t[-1] - t[0]

    def avg(vals):
        return np.trapezoid(vals, t) / span

    rho_t = rhos  # shape (samples, dim, dim)
    sz_t = np.einsum("ij,sji->s", ops["sz"], rho_t).real
    n_t = np.einsum("ij,sji->s", ops["n"], rho_t).real
    sp_t = np.einsum("ij,sji->s", ops["sp"], rho_t)
    a_t = np.einsum("ij,sji->s", ops["a"], rho_t)
    out = {"sz": float(avg(sz_t)), "n_photon": float(avg(n_t)),
           "splus@dc": complex(avg(sp_t))}
    for tone, name in ((sys.probe, "probe"), (sys.drive, "drive"),
                       (sys.spectroscopy, "spec")):
        if tone is None or tone.amplitude_ghz == 0:
            continue
        w = ghz_to_angular(tone.frequency_ghz)
        plus = np.exp(1j * w * t)
        # component multiplying exp(-i w t) and exp(+i w t) respectively
        out[f"splus@-{name}"] = complex(avg(sp_t * plus))
        out[f"splus@+{name}"] = complex(avg(sp_t * np.conj(plus)))
        if name == "probe":
            out["a@-probe"] = complex(avg(a_t * plus))
    tr_t = np.einsum("sii->s", rho_t).real
    out["_trace_err"] = float(np.max(np.abs(tr_t - 1.0)))
    return out


def evolve_to_steady(sys: TruncatedSystem, config: IntegratorConfig = None,
                     rho0=None):
    """Integrate to the time-periodic steady state.

    Convergence: successive window averages of the tracked observables
    (population, photon number, probe-frame cavity component) change by
    less than config.convergence_tol.
    """
    config = config or IntegratorConfig()
    ops = operators(sys.fock_dim)
    rhs = build_generator(sys)
    dim = rhs.dim
    window = _window_ns(sys, config)
    rho = (ground_state(sys) if rho0 is None else rho0).astype(complex)
    t0 = 0.0

    def flat_rhs(t, y):
        return rhs(t, y.reshape(dim, dim)).ravel()

    if config.settle_time_ns > 0:
        sol = solve_ivp(flat_rhs, (t0, t0 + config.settle_time_ns),
                        rho.ravel(), method="DOP853", rtol=config.rtol,
                        atol=config.atol)
        if not sol.success:
            raise RuntimeError(f"integration failed: {sol.message}")
        rho = sol.y[:, -1].reshape(dim, dim)
        t0 += config.settle_time_ns

    per_win = config.window_samples - 1
    prev = None
    stats = None
    trace_err = 0.0
    windows_done = 0
    while windows_done < config.max_windows:
        nw = min(config.windows_per_chunk,
                 config.max_windows - windows_done)
        t_eval = np.linspace(t0, t0 + nw * window, nw * per_win + 1)
        sol = solve_ivp(flat_rhs, (t0, t_eval[-1]), rho.ravel(),
                        method="DOP853", rtol=config.rtol, atol=config.atol,
                        t_eval=t_eval)
        if not sol.success:
            raise RuntimeError(f"integration failed: {sol.message}")
        rhos = sol.y.T.reshape(-1, dim, dim)
        converged = False
        for k in range(nw):
            sl = slice(k * per_win, (k + 1) * per_win + 1)
            stats = _window_stats(sys, ops, t_eval[sl], rhos[sl])
            trace_err = max(trace_err, stats.pop("_trace_err"))
            windows_done += 1
            if prev is not None:
                delta = max(
                    abs(stats["sz"] - prev["sz"]),
                    abs(stats["n_photon"] - prev["n_photon"]),
                    abs(stats.get("a@-probe", 0.0)
                        - prev.get("a@-probe", 0.0)))
                if delta < config.convergence_tol:
                    converged = True
                    rho = rhos[(k + 1) * per_win]
                    break
            prev = stats
        else:
            rho = rhos[-1]
            t0 = t_eval[-1]
            continue
        if converged:
            break
    else:
        raise NonConvergenceError(
            f"no steady state within {config.max_windows} windows "
            f"of {window:.4f} ns")

    rho = 0.5 * (rho + rho.conj().T)
    eigvals = np.linalg.eigvalsh(rho)
    fock_pop = float(np.real(rho[sys.fock_dim - 1, sys.fock_dim - 1]
                             + rho[-1, -1]))
    return EvolutionResult(
        steady_density_matrix=rho,
        period_averaged_expectations=stats,
        trace_drift=trace_err,
        min_eigenvalue=float(eigvals[0]),
        top_fock_occupation=fock_pop,
        windows_used=windows_done,
        window_ns=window,
    )


def transmission_oracle(sys: TruncatedSystem, probe_scan_ghz,
                        config: IntegratorConfig = None, seeds=None):
    """Oracle transmission across a probe-frequency scan.

    t = i*kappa*<a>_probe/(2*Omega_p), normalized so the bare cavity on
    resonance gives |t| = 1. seeds, when given, provides one
    (cavity_amplitude, population) pair per scan point to start near the
    expected state.
    """
    if sys.probe is None or sys.probe.amplitude_ghz <= 0:
        raise ValueError("transmission oracle needs an active probe tone")
    results = []
    for i, wp in enumerate(probe_scan_ghz):
        probe = Tone(sys.probe.amplitude_ghz, wp, "probe")
        point = TruncatedSystem(
            sys.fock_dim, sys.qubit_splitting_ghz, sys.longitudinal,
            sys.transverse, sys.resonator_freq_ghz, sys.coupling_ghz,
            sys.photon_decay_ghz, sys.rates, probe, sys.drive,
            sys.spectroscopy)
        rho0 = None
        if seeds is not None:
            alpha, sz = seeds[i]
            rho0 = seeded_state(point, alpha, sz)
        res = evolve_to_steady(point, config, rho0=rho0)
        if res.top_fock_occupation > 1e-4:
            raise TruncationError(
                f"top Fock occupation {res.top_fock_occupation:.2e} at "
                f"probe {wp} GHz; raise fock_dim")
        kappa = ghz_to_angular(sys.photon_decay_ghz)
        omega_p = ghz_to_angular(sys.probe.amplitude_ghz)
        a_comp = res.period_averaged_expectations["a@-probe"]
        results.append((wp, 1j * kappa * a_comp / (2.0 * omega_p)))
    return results


def _floquet_matrix(wq, wd, bar_drive, cutoff):
    """Extended-space matrix: diagonal blocks wq/2*sz + k*wd, first
    off-diagonal blocks bar_drive/2*sx."""
    nblk = 2 * cutoff + 1
    dim = 2 * nblk
    mat = np.zeros((dim, dim))
    sz = np.diag([0.5, -0.5])
    sx2 = 0.5 * np.array([[0.0, 1.0], [1.0, 0.0]])
    for blk in range(nblk):
        k = blk - cutoff
        i = 2 * blk
        mat[i:i + 2, i:i + 2] = wq * sz + k * wd * np.eye(2)
        if blk + 1 < nblk:
            j = 2 * (blk + 1)
            mat[i:i + 2, j:j + 2] = bar_drive * sx2
            mat[j:j + 2, i:i + 2] = bar_drive * sx2
    return mat


def _tracked_splitting(wq, wd, bar_drive, cutoff, ramp_steps):
    """Quasi-energy splitting continuously connected to wq at zero
    amplitude (homotopy tracking through an amplitude ramp)."""
    nblk = 2 * cutoff + 1
    dim = 2 * nblk
    v_e = np.zeros(dim)
    v_g = np.zeros(dim)
    v_e[2 * cutoff] = 1.0      # |e, k=0>
    v_g[2 * cutoff + 1] = 1.0  # |g, k=0>
    split = wq
    for amp in np.linspace(0.0, bar_drive, ramp_steps + 1)[1:]:
        evals, evecs = np.linalg.eigh(_floquet_matrix(wq, wd, amp, cutoff))
        ie = int(np.argmax(np.abs(evecs.T @ v_e)))
        ig = int(np.argmax(np.abs(evecs.T @ v_g)))
        v_e, v_g = evecs[:, ie], evecs[:, ig]
        raw = evals[ie] - evals[ig]
        # fold back to the branch continuous with the previous step
        m = round((split - raw) / wd)
        split = raw + m * wd
    return split


def floquet_quasienergies(p: FloquetProblem, ramp_steps=24):
    """Quasi-energy splitting of the driven two-level system.

    Returns (splitting_ghz, convergence_ghz) where convergence is the
    splitting change when the harmonic cutoff is raised by 2.
    """
    wq = ghz_to_angular(p.wq_ghz)
    wd = ghz_to_angular(p.wd_ghz)
    ob = ghz_to_angular(p.bar_drive_ghz)
    # distance of the quasi-energies +-wq/2 to the zone edge +-wd/2
    folded = (wq / 2.0 + wd / 2.0) % wd - wd / 2.0
    edge_dist = wd / 2.0 - abs(folded)
    if ob > 0 and edge_dist < ob / 2.0:
        raise ZoneFoldingError(
            f"splitting sits {edge_dist / (2 * np.pi):.3f} GHz from a zone "
            f"boundary, closer than half the effective drive; folding is "
            "ambiguous")
    if ob == 0:
        return p.wq_ghz, 0.0
    s1 = _tracked_splitting(wq, wd, ob, p.harmonic_cutoff, ramp_steps)
    s2 = _tracked_splitting(wq, wd, ob, p.harmonic_cutoff + 2, ramp_steps)
    return s1 / (2 * np.pi), abs(s2 - s1) / (2 * np.pi)
