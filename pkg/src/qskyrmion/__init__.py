"""Ground states, magnetization textures and topological charge of the 2D XXZ + DMI spin model."""

__version__ = "0.1.0"
