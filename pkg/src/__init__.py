# Bosonic Minimum Output Entropy Toolkit
