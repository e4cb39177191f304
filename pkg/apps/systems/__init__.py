# Fallcat Systems App
