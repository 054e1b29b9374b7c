"""Private core subpackage."""
