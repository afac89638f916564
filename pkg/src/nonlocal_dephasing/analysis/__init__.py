"""
Observables and estimation on trace distance trajectories.

Submodules are imported explicitly, `schedule` depends on `distance` and `trajectory`.
"""
