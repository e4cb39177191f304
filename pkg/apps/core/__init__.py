# Fallcat Core App
