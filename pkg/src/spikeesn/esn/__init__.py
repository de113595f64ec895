"""Numerical modules of the spike echo state network"""
