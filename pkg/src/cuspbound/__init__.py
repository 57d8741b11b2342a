"""Level-one modular forms, explicit coefficient bounds, and extremal-form scans."""
