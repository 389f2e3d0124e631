"""Registry of named array specs and experiment configurations.

All presets use a 30 GHz carrier with half-wavelength spacings; the
multi-frequency ones use a fractional frequency step of 5e-4. Sizes are
desk scale: the sweeps run in seconds to minutes on one core.
"""

from __future__ import annotations

from .geometry import ArraySpec
from .mle import MleConfig
from .sim import ExperimentConfig

DF_DEFAULT = 5e-4

SPEC_PRESETS: dict[str, ArraySpec] = {
    # linear/planar/single topology ladder
    "ula2-single": ArraySpec.half_wavelength(ntx=2),
    "ula8-single": ArraySpec.half_wavelength(ntx=8),
    "ula32-single": ArraySpec.half_wavelength(ntx=32),
    "upa4x4-single": ArraySpec.half_wavelength(ntx=4, nty=4),
    "ula8-ula8": ArraySpec.half_wavelength(ntx=8, nrx=8),
    "ula32-ula32": ArraySpec.half_wavelength(ntx=32, nrx=32),
    "upa4x4-ula8": ArraySpec.half_wavelength(ntx=4, nty=4, nrx=8),
    "upa4x4-upa4x4": ArraySpec.half_wavelength(ntx=4, nty=4, nrx=4, nry=4),
    # multi-frequency variants
    "ula8-single-nf4": ArraySpec.half_wavelength(ntx=8, nf=4, df=DF_DEFAULT),
    "ula32-single-nf32": ArraySpec.half_wavelength(ntx=32, nf=32, df=DF_DEFAULT),
    "upa8x8-upa8x8-nf8": ArraySpec.half_wavelength(ntx=8, nty=8, nrx=8, nry=8,
                                                   nf=8, df=DF_DEFAULT),
}

# presets exercised by the noiseless round-trip gate, one per topology pair
TOPOLOGY_PRESETS = (
    "ula8-single",
    "upa4x4-single",
    "ula8-ula8",
    "upa4x4-ula8",
    "upa4x4-upa4x4",
)

_SNR_0_20 = tuple(float(s) for s in range(21))

EXPERIMENT_PRESETS: dict[str, ExperimentConfig] = {
    "fig5a": ExperimentConfig(spec=SPEC_PRESETS["ula32-single"], snr_grid=_SNR_0_20,
                              degree_list=(1, 2, 3), trials=100,
                              amplitude_mode="unit", seed=1),
    "fig5b": ExperimentConfig(spec=SPEC_PRESETS["ula32-ula32"], snr_grid=_SNR_0_20,
                              degree_list=(1, 2, 3), trials=50,
                              amplitude_mode="unit", seed=1),
    "fig5d": ExperimentConfig(spec=SPEC_PRESETS["ula32-single-nf32"],
                              snr_grid=_SNR_0_20, degree_list=(1, 2, 3), trials=50,
                              amplitude_mode="unit", seed=1),
    "fig6a": ExperimentConfig(spec=SPEC_PRESETS["ula32-single"], snr_grid=_SNR_0_20,
                              degree_list=(1, 2, 3), trials=100,
                              amplitude_mode="exact", seed=1),
    "upa-desk": ExperimentConfig(spec=SPEC_PRESETS["upa8x8-upa8x8-nf8"],
                                 snr_grid=(0.0, 5.0, 10.0, 15.0, 20.0),
                                 degree_list=(1, 2, 3), trials=20,
                                 amplitude_mode="exact", seed=1),
}

TRAJECTORY_PRESETS: dict[str, tuple[ArraySpec, MleConfig]] = {
    "fig3a": (SPEC_PRESETS["ula2-single"], MleConfig(num_starts=128)),
    "fig3c": (SPEC_PRESETS["ula32-single"], MleConfig(num_starts=128)),
    "fig3f": (SPEC_PRESETS["ula32-ula32"], MleConfig(num_starts=128)),
}

LANDSCAPE_PRESETS: dict[str, dict] = {
    "fig9": {"d_true": 5.0, "d_range": (4.6, 5.4), "step": 1e-3,
             "num_antennas": 256, "fc": 30e9},
}
