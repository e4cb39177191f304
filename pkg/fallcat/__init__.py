# Fallcat - momentum-map connections, holonomy and curvature

__version__ = '1.0.0'
