# Fallcat Geometry App
