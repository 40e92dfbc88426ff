"""oaswrap: wrap REST(-like) APIs described by OpenAPI with a GraphQL interface.

The generator compiles an OAS (2.0 or 3.x) into a GraphQL schema plus resolve
plans; the bundled engine serves GraphQL queries by translating them into
composed HTTP requests against the target API.
"""

from .generator import GeneratedWrapper, GenerationOptions, generate
from .report import Report

__version__ = "0.1.0"

__all__ = ["generate", "GenerationOptions", "GeneratedWrapper", "Report", "__version__"]
