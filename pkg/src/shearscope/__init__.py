"""shearscope: continuous shearlet analysis for 2-D sampled data.

Submodules
----------
grid            sampling grids, the transform pair, SF2D files
generators      shearlet generators and the sheared system elements
admissibility   admissibility constants, moments, decay fits
xform           coefficient volumes, cone/low-pass projections, CV1 files
frames          frame bounds, truncation, tight windows, reconstruction
radon           shear-parametrized Radon transform, line singularities
wavefront       decay-slope maps and wavefront classification
cli             the ``shearscope`` command-line tool
"""
from .generators import (
    ShearletSpec,
    ShearParams,
    generator_from_label,
    make_classical_cone_generator,
    make_dog_generator,
    make_nu,
    make_tensor_generator,
    psi_ast_hat,
)
from .grid import (
    SampledField2D,
    Spectrum2D,
    dft_forward,
    dft_inverse,
    make_frequency_grid,
    read_sf2d,
    write_sf2d,
)
from .xform import (
    CoeffVolume,
    ConeSpec,
    cone_project,
    dual_cone_transform,
    lowpass_project,
    shearlet_transform,
)
from .frames import (
    FrameReport,
    SystemParams,
    WindowSpec,
    compute_delta,
    frame_bounds,
    reconstruct_cone,
    reconstruct_full,
    select_truncation,
    synthesize_tight_window,
)
from .radon import LineSingularity, RadonProfile, fractional_derivative, make_line_singularity, radon
from .wavefront import (
    DecayReport,
    ExpectedExponentBudget,
    WavefrontMap,
    decay_slope,
    expected_direct_exponent,
    expected_inverse_budget,
    wavefront_map,
)

__version__ = "0.1.0"
