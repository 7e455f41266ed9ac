# Juff test suite
