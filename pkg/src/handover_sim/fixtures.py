"""Canonical demo scenes used by tests, demos, and the operator console."""

from __future__ import annotations

import numpy as np

from .geometry import RigidTransform, quat_from_yaw
from .scene import Scene, TableSlab, catalog_by_key, with_descriptor


def mug_handle_scene() -> Scene:
    """A mug with its handle part plus a distractor pear."""
    catalog = catalog_by_key()
    mug = catalog["mug"].instantiate(
        "mug-0", RigidTransform(np.array([0.02, 0.03, 0.0]), quat_from_yaw(0.5)))
    pear = catalog["pear"].instantiate(
        "pear-0", RigidTransform(np.array([-0.15, -0.1, 0.0]), quat_from_yaw(0.0)))
    return Scene(id="mug-scene", seed=0, table=TableSlab(),
                 objects=(mug, pear))


def two_flashlight_scene() -> Scene:
    """Two identically named flashlights (red/blue) plus a bowl distractor."""
    catalog = catalog_by_key()
    red = with_descriptor(catalog["flashlight"], "red").instantiate(
        "red_flashlight-0",
        RigidTransform(np.array([-0.10, 0.08, 0.0]), quat_from_yaw(0.3)))
    blue = with_descriptor(catalog["flashlight"], "blue").instantiate(
        "blue_flashlight-0",
        RigidTransform(np.array([0.10, -0.09, 0.0]), quat_from_yaw(-0.4)))
    bowl = catalog["bowl"].instantiate(
        "bowl-0", RigidTransform(np.array([-0.12, -0.12, 0.0]), quat_from_yaw(0.0)))
    return Scene(id="flashlight-scene", seed=0, table=TableSlab(),
                 objects=(red, blue, bowl))
