# Fallcat Dynamics App
