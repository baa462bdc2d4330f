# noqa: D100

__title__ = "tubeground"
__description__ = "Desk-scale video referring expression grounding with content-aware queries."
__version__ = "0.1.0"
__author__ = """The tubeground developers"""
__copyright__ = "2026, The tubeground developers"
