# MINT feature selection modules
