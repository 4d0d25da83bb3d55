"""EV sessions, synthetic fleets and station envelopes"""
