import pytest

from handover_sim.fixtures import mug_handle_scene, two_flashlight_scene
from handover_sim.render import default_camera, render
from handover_sim.scene import catalog_by_key


@pytest.fixture(scope="session")
def catalog():
    return catalog_by_key()


@pytest.fixture(scope="session")
def camera():
    return default_camera()


@pytest.fixture(scope="session")
def mug_scene():
    return mug_handle_scene()


@pytest.fixture(scope="session")
def mug_render(mug_scene, camera):
    return render(mug_scene, camera)


@pytest.fixture(scope="session")
def flashlight_scene():
    return two_flashlight_scene()


@pytest.fixture(scope="session")
def flashlight_render(flashlight_scene, camera):
    return render(flashlight_scene, camera)
