"""Domain logic: severity laws, pools, pooled claims, ruin and convex-order checks."""
