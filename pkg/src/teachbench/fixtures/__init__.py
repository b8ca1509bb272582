"""Packaged URDF fixture corpus: minimal 2-link, planar 2-link (unit link
lengths), and a 6-DOF UR5e-like arm."""
from importlib import resources

NAMES = ("minimal", "planar_two_link", "ur5e")


def fixture_text(name: str) -> str:
    if name not in NAMES:
        raise KeyError(f"unknown fixture {name!r}; available: {NAMES}")
    return resources.files(__package__).joinpath(f"{name}.urdf").read_text(encoding="utf-8")


def fixture_path(name: str) -> str:
    if name not in NAMES:
        raise KeyError(f"unknown fixture {name!r}; available: {NAMES}")
    return str(resources.files(__package__).joinpath(f"{name}.urdf"))
