# Fallcat CLI App
