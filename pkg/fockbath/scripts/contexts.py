"""Python context manager which deals with the boilerplate for working with
Cairo SVG surfaces.
"""

import cairocffi as cairo


class SVGContextManager(object):
	"""A context manager which creates a Cairo SVG context."""

	def __init__(self, filename, width, height):
		"""Context manager for an SVG context with the specified filename and
		with all units given in points.
		"""
		self.filename = filename
		self.width = width
		self.height = height

	def __enter__(self):
		self.surface = cairo.SVGSurface(self.filename, self.width, self.height)
		self.ctx = cairo.Context(self.surface)
		return self.ctx

	def __exit__(self, type, value, traceback):
		self.ctx.show_page()
		self.surface.finish()
