# Explicit co-simulation framework
