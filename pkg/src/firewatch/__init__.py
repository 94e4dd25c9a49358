"""Firewatch: a desk-scale firefighter monitoring stack.

Simulated helmet and arm-strap wearables broadcast one-row CSV telemetry
over a modeled long-range radio channel to a mission-control service that
pairs streams by firefighter ID, scores stress, raises threshold alerts,
tracks geofence crossings, logs everything to a replayable journal, and
lets an incident commander recall units by lighting their helmet LED.
"""

__version__ = "0.1.0"
