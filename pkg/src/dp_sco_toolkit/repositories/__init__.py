"""Result file storage."""
