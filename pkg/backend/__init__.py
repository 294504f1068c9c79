# hexfam backend
# Exact classification, constructions and bad-pair search for polygon families in 3-space
