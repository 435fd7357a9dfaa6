"""ultrascale: Cantor sets, ultrametric valuations, p-adic trees and prime flows."""

__version__ = "0.1.0"
