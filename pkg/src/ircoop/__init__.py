"""Threshold-based analysis of incremental-redundancy cooperative coding
over quasi-static Rayleigh fading: code thresholds from weight spectra,
punctured thresholds, outage-based FER bounds, their high-SNR asymptotes,
energy savings and a frame-level simulator.
"""

__version__ = "0.1.0"

from .channels import (
    ChannelKind, ChannelMeasures, ChannelSpec, bhattacharyya, bhattacharyya_rate, capacity,
    cutoff_rate, measures,
)
from .spectra import (
    CodeThresholds, WeightSpectrum, load_spectrum, random_binary_exponent, random_binary_spectrum,
    restricted_quantities, save_spectrum, sf_distance, simple_threshold, ub_threshold,
)
from .puncturing import (
    PunctureParams, adjusted_threshold, effective_listen_fraction, is_self_decodable,
    punctured_threshold,
)
from .protocol import (
    CoopConfig, Geometry, Scenario, avg_bhattacharyya, load_scenario, reliable_set_prob, schedule,
)
from .outage import (
    EstimateKind, FerEstimate, fer_bound, outage_given_set, outage_m1, outage_m2_cooperative,
)
from .asymptotics import (
    ScenarioKind, coding_gain_bound, diversity_estimate, fer_asym, fer_asym_small_cstar,
    tail_product_bound,
)
from .energy import (
    EnergyMode, EnergyQuery, achievable_energy, energy_saving, energy_saving_firf,
    energy_saving_kappa, optimize_tau0,
)
from .simulator import SimConfig, SimResult, simulate_fer, simulate_firf_threshold, simulate_frame
