"""Bundled example network: driver mental state and physiology.

Seven variables: two binary mental-state indicators, ML (mental load)
and AF (active fatigue), and five continuous physiological signals
derived from heart-rate and respiration monitoring (SDSD and SDNN are
heart-rate-variability measures in ms, Mean_HR in beats/min, LF_HF_ratio
a dimensionless spectral ratio, Resp_rate in breaths/min).

The mental-state nodes are roots; physiology depends on them. The
Mean_HR distribution carries published estimates for this variable;
every other parameter is an illustrative fixture value chosen to give
the variables realistic ranges and clearly recoverable dependencies.
They are not measurements.

The same network ships as a JSON model file (fixtures/driver_model.json)
so file-based workflows have a ready-made input; ``load_fixture`` reads
it through the regular model loader.
"""

from __future__ import annotations

from importlib import resources

from .cpd import CategoricalCpt, ClgCpd, VariableSpec
from .graph import Dag
from .modelio import load_model
from .network import Network

DEFAULT_SAMPLE_ROWS = 1892

_NODES = ("ML", "AF", "SDSD", "Mean_HR", "LF_HF_ratio", "SDNN", "Resp_rate")

_EDGES = (
    ("ML", "SDSD"),
    ("AF", "SDSD"),
    ("ML", "Mean_HR"),
    ("AF", "Mean_HR"),
    ("SDSD", "Mean_HR"),
    ("ML", "LF_HF_ratio"),
    ("AF", "LF_HF_ratio"),
    ("SDSD", "LF_HF_ratio"),
    ("Mean_HR", "LF_HF_ratio"),
    ("SDSD", "SDNN"),
    ("Mean_HR", "SDNN"),
    ("LF_HF_ratio", "SDNN"),
    ("SDNN", "Resp_rate"),
)

_BINARY = ("0", "1")
_STATE_PAIR = (_BINARY, _BINARY)


def driver_network() -> Network:
    """Construct the example network in code (no file access)."""
    dag = Dag(_NODES, _EDGES)
    specs = [
        VariableSpec("ML", _BINARY),
        VariableSpec("AF", _BINARY),
        VariableSpec("SDSD", None),
        VariableSpec("Mean_HR", None),
        VariableSpec("LF_HF_ratio", None),
        VariableSpec("SDNN", None),
        VariableSpec("Resp_rate", None),
    ]
    cpds = [
        CategoricalCpt("ML", _BINARY, (), (), [[0.5, 0.5]]),
        CategoricalCpt("AF", _BINARY, (), (), [[0.5, 0.5]]),
        # rows in (ML, AF) configuration order: (0,0), (0,1), (1,0), (1,1)
        ClgCpd(
            "SDSD",
            ("ML", "AF"),
            _STATE_PAIR,
            (),
            [45.0, 34.0, 40.0, 28.0],
            [[], [], [], []],
            [45.0, 12.0, 40.0, 24.0],
        ),
        ClgCpd(
            "Mean_HR",
            ("ML", "AF"),
            _STATE_PAIR,
            ("SDSD",),
            [79.930, 77.670, 77.967, 108.161],
            [[-0.130], [-0.342], [-0.159], [-0.516]],
            [13.654, 4.432, 14.879, 26.755],
        ),
        ClgCpd(
            "LF_HF_ratio",
            ("ML", "AF"),
            _STATE_PAIR,
            ("SDSD", "Mean_HR"),
            [1.4, 1.5, 1.8, 2.1],
            [
                [-0.018, 0.008],
                [-0.020, 0.007],
                [-0.022, 0.009],
                [-0.025, 0.011],
            ],
            [0.55, 0.50, 0.60, 0.70],
        ),
        ClgCpd(
            "SDNN",
            (),
            (),
            ("SDSD", "Mean_HR", "LF_HF_ratio"),
            [20.0],
            [[0.8, -0.10, 4.0]],
            [10.0],
        ),
        ClgCpd(
            "Resp_rate",
            (),
            (),
            ("SDNN",),
            [19.5],
            [[-0.07]],
            [3.2],
        ),
    ]
    return Network(dag, specs, cpds).require_valid()


def fixture_path():
    """Filesystem path of the bundled model file."""
    return resources.files("clgnet").joinpath("fixtures/driver_model.json")


def load_fixture() -> Network:
    """Load the bundled model file through the regular loader."""
    with resources.as_file(fixture_path()) as path:
        return load_model(path)
