# Fallcat Connection App
