# Fallcat Apps
