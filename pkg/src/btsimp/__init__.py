"""Back-translation text simplification with asymmetric denoising and
reinforcement rewards, at desk scale."""

__version__ = "0.1.0"
