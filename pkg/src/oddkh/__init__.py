"""Odd Khovanov homology of knots and links from planar diagram codes."""
