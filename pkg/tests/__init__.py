"""Tests package for kinchem"""
