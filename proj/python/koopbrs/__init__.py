"""Koopman-lifted backward reachable sets from data."""

import json

from ._core import *  # noqa: F401,F403
from ._core import _brs_from_json, _brs_json, _export_bundle

__version__ = "0.1.0"


def brs_to_dict(result):
    return json.loads(_brs_json(result))


def brs_from_dict(data):
    return _brs_from_json(json.dumps(data))


def export_bundle(result, trajectory=None):
    return json.loads(_export_bundle(result, trajectory))
