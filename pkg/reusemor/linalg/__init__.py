"""Sparse kernels, GMRES, SPAI and reusable preconditioner chains."""
