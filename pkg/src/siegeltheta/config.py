"""Default tolerances, read from one JSON file.

The packaged defaults.json is used unless SIEGELTHETA_CONFIG names another file.
"""

import json
import os
from importlib import resources


def load_defaults():
    path = os.environ.get("SIEGELTHETA_CONFIG")
    if path:
        with open(path) as fh:
            return json.load(fh)
    return json.loads(resources.files(__package__).joinpath("defaults.json").read_text())
