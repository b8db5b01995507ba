"""Bit-accurate CIC decimation: fixed-point datapath, MCLA adder, decimation chain."""

from .analysis import Spectrum, export_csv, measure_snr, spectrum
from .chain import (
    ChainConfig,
    FirFilter,
    build_chain,
    chain_process,
    chain_response,
    design_droop_corrector,
    design_halfband,
)
from .cic import (
    CicDesign,
    CicParams,
    CicState,
    design,
    frequency_response_mag,
    impulse_response,
    init_state,
    output_msb,
    process,
    process_pipelined,
    register_growth,
    truncation_error_bound,
)
from .errors import (
    CicError,
    ConfigError,
    ContractError,
    DesignError,
    MeasurementError,
    SampleIOError,
    VerificationError,
)
from .fixed_point import FixedWord, add_wrap, resize_extend, truncate_lsb, wrap
from .mcla import (
    GroupPg,
    Netlist,
    PgPair,
    bit_pg,
    block_carries,
    emit_netlist,
    evaluate_netlist,
    group_pg,
    mcla_add,
)

__version__ = "0.1.0"
