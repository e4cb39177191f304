# Fallcat Lie App
