namespace epqp {}
