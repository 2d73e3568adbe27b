"""Sign-changing conductivity problems on star and tadpole networks."""
